#pragma once

#include "forge/rng.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace forge::prefalign {

// Softmax policy over finite prompt x response sets, parameterized by a
// row-major logit matrix. Probability rows are strictly positive and sum to
// one; log-space arithmetic keeps that true for |logits| <= 50.
struct TabularPolicy {
    std::vector<std::string> prompts;
    std::vector<std::string> responses;
    std::vector<double> logits;  // [prompts x responses], row-major

    static TabularPolicy uniform(std::size_t num_prompts, std::size_t num_responses);
    static TabularPolicy random(std::size_t num_prompts, std::size_t num_responses, Rng& rng,
                                double scale = 1.0);

    std::size_t num_prompts() const { return prompts.size(); }
    std::size_t num_responses() const { return responses.size(); }

    double logit(std::size_t x, std::size_t y) const;
    double& logit(std::size_t x, std::size_t y);

    // log pi(y|x) / pi(y|x) for one cell, and the whole normalized row.
    double log_prob(std::size_t x, std::size_t y) const;
    double prob(std::size_t x, std::size_t y) const;
    std::vector<double> row_log_probs(std::size_t x) const;

    void validate() const;  // shape consistency, finite logits
};

struct RewardTable {
    std::size_t num_prompts = 0;
    std::size_t num_responses = 0;
    std::vector<double> values;  // row-major

    static RewardTable zeros(std::size_t num_prompts, std::size_t num_responses);
    static RewardTable random(std::size_t num_prompts, std::size_t num_responses, Rng& rng,
                              double scale = 1.0);

    double operator()(std::size_t x, std::size_t y) const;
    double& at(std::size_t x, std::size_t y);
    void validate() const;  // shape consistency, finite values
};

// (x, y_w, y_l) with y_w preferred over y_l; y_w != y_l always.
struct PreferenceTriple {
    std::size_t prompt;
    std::size_t winner;
    std::size_t loser;

    PreferenceTriple(std::size_t x, std::size_t y_w, std::size_t y_l);
};

struct DpoConfig {
    double beta = 0.1;
    double learning_rate = 0.1;
    int epochs = 500;
    // Carried as metadata; tabular response ids have no token lengths.
    int prompt_max_len = 1024;
    int output_max_len = 512;

    void validate() const;
};

// Preference probability of the first reward over the second: the
// numerically stable logistic sigma(r1 - r2).
double bt_prob(double r1, double r2);

// Negative log-likelihood of the preference data under a reward table:
// -mean log sigma(r(x,y_w) - r(x,y_l)). Optional per-triple weights.
double reward_nll(const RewardTable& rewards, std::span<const PreferenceTriple> data,
                  std::span<const double> weights = {});

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // matches the parameter matrix layout
};

// Exact analytic gradient of reward_nll with respect to the reward values.
LossGrad reward_nll_and_grad(const RewardTable& rewards, std::span<const PreferenceTriple> data,
                             std::span<const double> weights = {});

// The KL-constrained optimum: pi_r(y|x) = pi_ref(y|x) exp(r(x,y)/beta) / Z(x)
// with Z(x) the exact finite sum over responses.
TabularPolicy optimal_policy(const RewardTable& rewards, const TabularPolicy& ref, double beta);

// beta * log(pi(y|x) / pi_ref(y|x)); the per-prompt constant beta*log Z(x)
// is omitted.
double implicit_reward(const TabularPolicy& policy, const TabularPolicy& ref, std::size_t x,
                       std::size_t y, double beta);

// Preference probability induced by a policy/reference pair:
// sigma(beta*log-ratio(y_w) - beta*log-ratio(y_l)).
double dpo_pref_prob(const TabularPolicy& policy, const TabularPolicy& ref,
                     const PreferenceTriple& triple, double beta);

// Loss -mean log dpo_pref_prob and its exact analytic gradient with respect
// to the policy logits.
LossGrad dpo_loss_and_grad(const TabularPolicy& policy, const TabularPolicy& ref,
                           std::span<const PreferenceTriple> data, double beta,
                           std::span<const double> weights = {});

struct TrainResult {
    TabularPolicy policy;
    std::vector<double> loss_trace;  // one entry per epoch
};

// Full-batch gradient descent on the preference loss. Throws TrainingError
// when the loss exceeds 10x its initial value.
TrainResult train_dpo(const TabularPolicy& init, const TabularPolicy& ref,
                      std::span<const PreferenceTriple> data, const DpoConfig& config,
                      std::span<const double> weights = {});

// Gradient descent fit of a reward table on the preference data (the
// explicit reward-modelling route).
RewardTable fit_reward(std::size_t num_prompts, std::size_t num_responses,
                       std::span<const PreferenceTriple> data, double learning_rate, int epochs,
                       std::span<const double> weights = {});

// Synthetic preference data: uniform prompt, two distinct responses sampled
// from the reference policy, oriented by the latent-reward preference
// probability.
std::vector<PreferenceTriple> sample_preference_dataset(const RewardTable& latent,
                                                        const TabularPolicy& ref, std::size_t n,
                                                        Rng& rng);

}  // namespace forge::prefalign
