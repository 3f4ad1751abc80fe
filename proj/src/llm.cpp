#include "forge/llm.hpp"

#include "forge/errors.hpp"
#include "forge/hash.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <thread>

namespace forge::llm {

namespace {

using nlohmann::ordered_json;

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Splits "scheme://host[:port]" from an optional path prefix.
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ArgumentError("backend url must include a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, ""};
    }
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

bool transient_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

ordered_json params_to_json(const GenerationParams& params) {
    ordered_json j;
    j["temperature"] = params.temperature;
    j["max_new_tokens"] = params.max_new_tokens;
    j["stop_sequences"] = params.stop_sequences;
    return j;
}

}  // namespace

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::live: return "live";
        case Mode::record: return "record";
        case Mode::replay: return "replay";
    }
    return "replay";
}

Mode mode_from_string(std::string_view s) {
    if (s == "live") return Mode::live;
    if (s == "record") return Mode::record;
    if (s == "replay") return Mode::replay;
    throw ArgumentError("unknown mode '" + std::string(s) + "' (expected live|record|replay)");
}

void GenerationParams::validate() const {
    if (!(temperature >= 0.0)) {
        throw ArgumentError("temperature must be >= 0");
    }
    if (max_new_tokens < 1) {
        throw ArgumentError("max_new_tokens must be >= 1");
    }
}

GenerationParams generation_defaults() {
    GenerationParams params;
    params.temperature = 0.7;
    params.max_new_tokens = 2048;
    return params;
}

GenerationParams judge_defaults() {
    GenerationParams params;
    params.temperature = 0.0;
    params.max_new_tokens = 1024;
    return params;
}

BackendConfig BackendConfig::from_env() {
    BackendConfig config;
    if (const char* url = std::getenv("FORGE_BACKEND_URL")) {
        config.url = url;
    }
    if (const char* key = std::getenv("FORGE_BACKEND_KEY")) {
        config.api_key = key;
    }
    if (const char* mode = std::getenv("FORGE_MODE")) {
        config.mode = mode_from_string(mode);
    }
    return config;
}

std::string prompt_hash(const prompts::PromptBundle& bundle, const GenerationParams& params,
                        std::string_view backend_id) {
    // Length-prefixed framing so adjacent fields can never be confused.
    std::string payload;
    const auto append = [&payload](std::string_view part) {
        payload += std::to_string(part.size());
        payload += ':';
        payload += part;
    };
    payload += bundle.system ? '1' : '0';
    if (bundle.system) append(*bundle.system);
    append(bundle.body);
    char number[64];
    std::snprintf(number, sizeof(number), "%.17g", params.temperature);
    append(number);
    append(std::to_string(params.max_new_tokens));
    append(std::to_string(params.stop_sequences.size()));
    for (const auto& stop : params.stop_sequences) append(stop);
    append(backend_id);
    return sha256_hex(payload);
}

Client::Client(BackendConfig config) : config_(std::move(config)) {
    if (config_.backend_id.empty()) {
        config_.backend_id = config_.model;
    }
    if (!config_.cache_path.empty() && std::filesystem::exists(config_.cache_path)) {
        std::ifstream in(config_.cache_path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            ordered_json j = ordered_json::parse(line, nullptr, false);
            if (!j.is_object() || !j.contains("prompt_hash") || !j.contains("completion")) {
                throw ValidationError(config_.cache_path.string() + ":" +
                                      std::to_string(line_no) + ": malformed transcript line");
            }
            cache_[j["prompt_hash"].get<std::string>()] = j["completion"].get<std::string>();
        }
    }
    if (config_.mode == Mode::replay && config_.cache_path.empty()) {
        throw ArgumentError("replay mode requires a cache file");
    }
}

std::size_t Client::cache_size() const {
    std::shared_lock lock(cache_mutex_);
    return cache_.size();
}

void Client::rate_limit_wait() {
    if (config_.requests_per_second <= 0.0) {
        return;
    }
    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / config_.requests_per_second));
    std::chrono::steady_clock::time_point wait_until;
    {
        std::lock_guard lock(rate_mutex_);
        const auto now = std::chrono::steady_clock::now();
        wait_until = std::max(now, next_request_slot_);
        next_request_slot_ = wait_until + interval;
    }
    std::this_thread::sleep_until(wait_until);
}

std::string Client::http_generate(const prompts::PromptBundle& bundle,
                                  const GenerationParams& params) {
    const auto [base, prefix] = split_url(config_.url);
    httplib::Client http(base);
    http.set_connection_timeout(config_.timeout_sec);
    http.set_read_timeout(config_.timeout_sec);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    ordered_json body;
    body["model"] = config_.model;
    ordered_json messages = ordered_json::array();
    if (bundle.system) {
        messages.push_back({{"role", "system"}, {"content", *bundle.system}});
    }
    messages.push_back({{"role", "user"}, {"content", bundle.body}});
    body["messages"] = std::move(messages);
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_new_tokens;
    if (!params.stop_sequences.empty()) {
        body["stop"] = params.stop_sequences;
    }
    const std::string payload = body.dump();
    const std::string path = prefix + "/v1/chat/completions";

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.retry_base_ms << (attempt - 1)));
        }
        rate_limit_wait();
        auto result = http.Post(path, headers, payload, "application/json");
        if (!result) {
            last_error = "connection error: " + httplib::to_string(result.error());
            continue;  // transient
        }
        if (result->status == 200) {
            ordered_json response = ordered_json::parse(result->body, nullptr, false);
            if (!response.is_object() || !response.contains("choices") ||
                response["choices"].empty()) {
                throw BackendError("backend returned an unexpected response body", 200);
            }
            const auto& choice = response["choices"][0];
            if (!choice.contains("message") || !choice["message"].contains("content")) {
                throw BackendError("backend response has no message content", 200);
            }
            return choice["message"]["content"].get<std::string>();
        }
        if (!transient_status(result->status)) {
            throw BackendError("backend request failed with status " +
                                   std::to_string(result->status),
                               result->status);
        }
        last_error = "status " + std::to_string(result->status);
    }
    throw BackendError("backend request failed after " +
                       std::to_string(config_.max_retries + 1) + " attempts (" + last_error +
                       ")");
}

void Client::append_transcript(const CompletionTranscript& transcript) {
    std::lock_guard lock(file_mutex_);
    if (!cache_out_.is_open()) {
        cache_out_.open(config_.cache_path, std::ios::app | std::ios::binary);
        if (!cache_out_) {
            throw ArgumentError("cannot open cache file for writing: " +
                                config_.cache_path.string());
        }
    }
    ordered_json j;
    j["prompt_hash"] = transcript.prompt_hash;
    if (transcript.system) j["system"] = *transcript.system;
    j["prompt"] = transcript.prompt;
    j["params"] = params_to_json(transcript.params);
    j["completion"] = transcript.completion;
    j["backend_id"] = transcript.backend_id;
    j["timestamp"] = transcript.timestamp;
    cache_out_ << j.dump() << '\n';
    cache_out_.flush();
}

std::string Client::generate(const prompts::PromptBundle& bundle,
                             const GenerationParams& params) {
    params.validate();

    // Bounded in-flight concurrency.
    {
        std::unique_lock lock(flight_mutex_);
        flight_cv_.wait(lock, [this] { return in_flight_ < config_.max_in_flight; });
        ++in_flight_;
    }
    struct FlightRelease {
        Client* client;
        ~FlightRelease() {
            {
                std::lock_guard lock(client->flight_mutex_);
                --client->in_flight_;
            }
            client->flight_cv_.notify_one();
        }
    } release{this};

    const std::string hash = prompt_hash(bundle, params, config_.backend_id);
    if (config_.mode != Mode::live) {
        std::shared_lock lock(cache_mutex_);
        if (const auto it = cache_.find(hash); it != cache_.end()) {
            return it->second;
        }
    }
    if (config_.mode == Mode::replay) {
        throw ReplayMissError(hash);
    }

    const std::string completion = http_generate(bundle, params);

    if (config_.mode == Mode::record) {
        bool inserted = false;
        {
            std::unique_lock lock(cache_mutex_);
            inserted = cache_.emplace(hash, completion).second;
        }
        if (inserted) {
            CompletionTranscript transcript;
            transcript.prompt_hash = hash;
            transcript.system = bundle.system;
            transcript.prompt = bundle.body;
            transcript.params = params;
            transcript.completion = completion;
            transcript.backend_id = config_.backend_id;
            transcript.timestamp = utc_now();
            append_transcript(transcript);
        }
    }
    return completion;
}

}  // namespace forge::llm
