#include "forge/prefalign.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

namespace forge::prefalign {

namespace {

double logsumexp(std::span<const double> values) {
    double max_value = -std::numeric_limits<double>::infinity();
    for (double v : values) max_value = std::max(max_value, v);
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - max_value);
    return max_value + std::log(sum);
}

// log sigma(x), stable for large |x|.
double log_sigmoid(double x) {
    if (x >= 0.0) {
        return -std::log1p(std::exp(-x));
    }
    return x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<std::string> index_names(std::string_view prefix, std::size_t n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back(std::string(prefix) + std::to_string(i));
    }
    return names;
}

void check_data(std::span<const PreferenceTriple> data, std::size_t num_prompts,
                std::size_t num_responses, std::span<const double> weights) {
    if (data.empty()) {
        throw ArgumentError("preference data must be non-empty");
    }
    if (!weights.empty() && weights.size() != data.size()) {
        throw ArgumentError("weights must match the data length");
    }
    for (const auto& triple : data) {
        if (triple.prompt >= num_prompts || triple.winner >= num_responses ||
            triple.loser >= num_responses) {
            throw ArgumentError("preference triple indexes out of range");
        }
    }
}

void check_same_shape(const TabularPolicy& a, const TabularPolicy& b) {
    if (a.num_prompts() != b.num_prompts() || a.num_responses() != b.num_responses()) {
        throw ArgumentError("policy shapes do not match");
    }
}

}  // namespace

PreferenceTriple::PreferenceTriple(std::size_t x, std::size_t y_w, std::size_t y_l)
    : prompt(x), winner(y_w), loser(y_l) {
    if (y_w == y_l) {
        throw ArgumentError("preferred and dispreferred responses must differ");
    }
}

TabularPolicy TabularPolicy::uniform(std::size_t num_prompts, std::size_t num_responses) {
    TabularPolicy policy;
    policy.prompts = index_names("x", num_prompts);
    policy.responses = index_names("y", num_responses);
    policy.logits.assign(num_prompts * num_responses, 0.0);
    return policy;
}

TabularPolicy TabularPolicy::random(std::size_t num_prompts, std::size_t num_responses, Rng& rng,
                                    double scale) {
    TabularPolicy policy = uniform(num_prompts, num_responses);
    for (auto& logit : policy.logits) {
        logit = (rng.unit() * 2.0 - 1.0) * scale;
    }
    return policy;
}

double TabularPolicy::logit(std::size_t x, std::size_t y) const {
    return logits[x * num_responses() + y];
}

double& TabularPolicy::logit(std::size_t x, std::size_t y) {
    return logits[x * num_responses() + y];
}

std::vector<double> TabularPolicy::row_log_probs(std::size_t x) const {
    const std::size_t r = num_responses();
    std::vector<double> row(logits.begin() + x * r, logits.begin() + (x + 1) * r);
    const double norm = logsumexp(row);
    for (double& v : row) v -= norm;
    return row;
}

double TabularPolicy::log_prob(std::size_t x, std::size_t y) const {
    const std::size_t r = num_responses();
    std::span<const double> row(logits.data() + x * r, r);
    return row[y] - logsumexp(row);
}

double TabularPolicy::prob(std::size_t x, std::size_t y) const {
    return std::exp(log_prob(x, y));
}

void TabularPolicy::validate() const {
    if (prompts.empty() || responses.empty()) {
        throw ArgumentError("policy needs at least one prompt and one response");
    }
    if (logits.size() != prompts.size() * responses.size()) {
        throw ArgumentError("logit matrix does not match prompt/response counts");
    }
    for (double v : logits) {
        if (!std::isfinite(v)) {
            throw ArgumentError("policy logits must be finite");
        }
    }
}

RewardTable RewardTable::zeros(std::size_t num_prompts, std::size_t num_responses) {
    RewardTable table;
    table.num_prompts = num_prompts;
    table.num_responses = num_responses;
    table.values.assign(num_prompts * num_responses, 0.0);
    return table;
}

RewardTable RewardTable::random(std::size_t num_prompts, std::size_t num_responses, Rng& rng,
                                double scale) {
    RewardTable table = zeros(num_prompts, num_responses);
    for (auto& value : table.values) {
        value = (rng.unit() * 2.0 - 1.0) * scale;
    }
    return table;
}

double RewardTable::operator()(std::size_t x, std::size_t y) const {
    return values[x * num_responses + y];
}

double& RewardTable::at(std::size_t x, std::size_t y) {
    return values[x * num_responses + y];
}

void RewardTable::validate() const {
    if (values.size() != num_prompts * num_responses) {
        throw ArgumentError("reward table does not match its declared shape");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ArgumentError("reward values must be finite");
        }
    }
}

void DpoConfig::validate() const {
    if (!(beta > 0.0)) {
        throw ArgumentError("beta must be positive");
    }
    if (!(learning_rate > 0.0)) {
        throw ArgumentError("learning_rate must be positive");
    }
    if (epochs < 1) {
        throw ArgumentError("epochs must be at least 1");
    }
}

double bt_prob(double r1, double r2) {
    if (!std::isfinite(r1) || !std::isfinite(r2)) {
        throw ArgumentError("rewards must be finite");
    }
    return sigmoid(r1 - r2);
}

double reward_nll(const RewardTable& rewards, std::span<const PreferenceTriple> data,
                  std::span<const double> weights) {
    return reward_nll_and_grad(rewards, data, weights).loss;
}

LossGrad reward_nll_and_grad(const RewardTable& rewards, std::span<const PreferenceTriple> data,
                             std::span<const double> weights) {
    rewards.validate();
    check_data(data, rewards.num_prompts, rewards.num_responses, weights);

    LossGrad out;
    out.grad.assign(rewards.values.size(), 0.0);
    double total_weight = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        const auto& t = data[i];
        const double margin = rewards(t.prompt, t.winner) - rewards(t.prompt, t.loser);
        out.loss += -w * log_sigmoid(margin);
        // d(-log sigma(m))/dm = -(1 - sigma(m)) = -sigma(-m)
        const double dmargin = -sigmoid(-margin);
        out.grad[t.prompt * rewards.num_responses + t.winner] += w * dmargin;
        out.grad[t.prompt * rewards.num_responses + t.loser] -= w * dmargin;
        total_weight += w;
    }
    if (!(total_weight > 0.0)) {
        throw ArgumentError("total weight must be positive");
    }
    out.loss /= total_weight;
    for (double& g : out.grad) g /= total_weight;
    return out;
}

TabularPolicy optimal_policy(const RewardTable& rewards, const TabularPolicy& ref, double beta) {
    ref.validate();
    rewards.validate();
    if (rewards.num_prompts != ref.num_prompts() || rewards.num_responses != ref.num_responses()) {
        throw ArgumentError("reward table shape does not match the reference policy");
    }
    if (!(beta > 0.0)) {
        throw ArgumentError("beta must be positive");
    }

    TabularPolicy out = ref;
    const std::size_t r = ref.num_responses();
    for (std::size_t x = 0; x < ref.num_prompts(); ++x) {
        // Unnormalized log weights log pi_ref + r/beta; the partition
        // function Z(x) is the exact finite sum over the row.
        std::vector<double> log_weights = ref.row_log_probs(x);
        for (std::size_t y = 0; y < r; ++y) {
            log_weights[y] += rewards(x, y) / beta;
        }
        const double log_z = logsumexp(log_weights);
        for (std::size_t y = 0; y < r; ++y) {
            out.logit(x, y) = log_weights[y] - log_z;
        }
    }
    return out;
}

double implicit_reward(const TabularPolicy& policy, const TabularPolicy& ref, std::size_t x,
                       std::size_t y, double beta) {
    check_same_shape(policy, ref);
    const double ref_log_prob = ref.log_prob(x, y);
    if (!std::isfinite(ref_log_prob)) {
        throw DomainError("reference probability is zero for the requested response");
    }
    return beta * (policy.log_prob(x, y) - ref_log_prob);
}

double dpo_pref_prob(const TabularPolicy& policy, const TabularPolicy& ref,
                     const PreferenceTriple& triple, double beta) {
    const double rw = implicit_reward(policy, ref, triple.prompt, triple.winner, beta);
    const double rl = implicit_reward(policy, ref, triple.prompt, triple.loser, beta);
    return sigmoid(rw - rl);
}

LossGrad dpo_loss_and_grad(const TabularPolicy& policy, const TabularPolicy& ref,
                           std::span<const PreferenceTriple> data, double beta,
                           std::span<const double> weights) {
    policy.validate();
    ref.validate();
    check_same_shape(policy, ref);
    check_data(data, policy.num_prompts(), policy.num_responses(), weights);

    LossGrad out;
    out.grad.assign(policy.logits.size(), 0.0);
    const std::size_t r = policy.num_responses();

    // Per-prompt log-prob rows, computed once.
    std::vector<std::vector<double>> policy_rows(policy.num_prompts());
    std::vector<std::vector<double>> ref_rows(policy.num_prompts());
    std::vector<bool> needed(policy.num_prompts(), false);
    for (const auto& t : data) needed[t.prompt] = true;
    for (std::size_t x = 0; x < policy.num_prompts(); ++x) {
        if (needed[x]) {
            policy_rows[x] = policy.row_log_probs(x);
            ref_rows[x] = ref.row_log_probs(x);
        }
    }

    double total_weight = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        const auto& t = data[i];
        const auto& lp = policy_rows[t.prompt];
        const auto& lr = ref_rows[t.prompt];
        const double h = beta * ((lp[t.winner] - lr[t.winner]) - (lp[t.loser] - lr[t.loser]));
        out.loss += -w * log_sigmoid(h);
        // d(-log sigma(h))/dh = -sigma(-h); the softmax terms of
        // d log pi(y_w|x)/dz and d log pi(y_l|x)/dz cancel, leaving the
        // two indicator entries.
        const double dh = -w * sigmoid(-h);
        out.grad[t.prompt * r + t.winner] += dh * beta;
        out.grad[t.prompt * r + t.loser] -= dh * beta;
        total_weight += w;
    }
    if (!(total_weight > 0.0)) {
        throw ArgumentError("total weight must be positive");
    }
    out.loss /= total_weight;
    for (double& g : out.grad) g /= total_weight;
    return out;
}

TrainResult train_dpo(const TabularPolicy& init, const TabularPolicy& ref,
                      std::span<const PreferenceTriple> data, const DpoConfig& config,
                      std::span<const double> weights) {
    config.validate();
    init.validate();

    TrainResult result;
    result.policy = init;
    result.loss_trace.reserve(static_cast<std::size_t>(config.epochs));

    double initial_loss = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const LossGrad lg = dpo_loss_and_grad(result.policy, ref, data, config.beta, weights);
        if (epoch == 0) {
            initial_loss = lg.loss;
        } else if (lg.loss > 10.0 * initial_loss && lg.loss > 1e-12) {
            throw TrainingError("training diverged (loss " + std::to_string(lg.loss) +
                                " exceeds 10x the initial " + std::to_string(initial_loss) +
                                "); try a smaller learning rate");
        }
        result.loss_trace.push_back(lg.loss);
        for (std::size_t i = 0; i < result.policy.logits.size(); ++i) {
            result.policy.logits[i] -= config.learning_rate * lg.grad[i];
        }
    }
    return result;
}

RewardTable fit_reward(std::size_t num_prompts, std::size_t num_responses,
                       std::span<const PreferenceTriple> data, double learning_rate, int epochs,
                       std::span<const double> weights) {
    if (!(learning_rate > 0.0) || epochs < 1) {
        throw ArgumentError("fit_reward needs a positive learning rate and at least one epoch");
    }
    RewardTable table = RewardTable::zeros(num_prompts, num_responses);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const LossGrad lg = reward_nll_and_grad(table, data, weights);
        for (std::size_t i = 0; i < table.values.size(); ++i) {
            table.values[i] -= learning_rate * lg.grad[i];
        }
    }
    return table;
}

std::vector<PreferenceTriple> sample_preference_dataset(const RewardTable& latent,
                                                        const TabularPolicy& ref, std::size_t n,
                                                        Rng& rng) {
    ref.validate();
    latent.validate();
    if (latent.num_prompts != ref.num_prompts() || latent.num_responses != ref.num_responses()) {
        throw ArgumentError("latent reward shape does not match the reference policy");
    }
    if (ref.num_responses() < 2) {
        throw ArgumentError("need at least two responses to form preference pairs");
    }
    if (n < 1) {
        throw ArgumentError("n must be at least 1");
    }

    const std::size_t r = ref.num_responses();
    std::vector<PreferenceTriple> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t x = rng.below(ref.num_prompts());
        std::vector<double> probs(r);
        for (std::size_t y = 0; y < r; ++y) probs[y] = ref.prob(x, y);

        // Inverse-CDF draw over the row, optionally excluding one response
        // (renormalized), so the second draw is exact without rejection.
        const auto draw = [&probs, &rng](std::size_t skip) {
            double mass = 0.0;
            std::size_t last = 0;
            for (std::size_t y = 0; y < probs.size(); ++y) {
                if (y != skip) {
                    mass += probs[y];
                    last = y;
                }
            }
            double u = rng.unit() * mass;
            for (std::size_t y = 0; y < probs.size(); ++y) {
                if (y == skip) continue;
                if (u < probs[y]) return y;
                u -= probs[y];
            }
            return last;
        };

        const std::size_t y1 = draw(r /* no skip */);
        const std::size_t y2 = draw(y1);
        const double p_first = bt_prob(latent(x, y1), latent(x, y2));
        if (rng.bernoulli(p_first)) {
            out.emplace_back(x, y1, y2);
        } else {
            out.emplace_back(x, y2, y1);
        }
    }
    return out;
}

}  // namespace forge::prefalign
