#pragma once

#include "forge/prompts.hpp"

#include <condition_variable>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace forge::llm {

enum class Mode { live, record, replay };
std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view s);

struct GenerationParams {
    double temperature = 0.7;
    int max_new_tokens = 2048;
    std::vector<std::string> stop_sequences;

    void validate() const;  // temperature >= 0, max_new_tokens >= 1
};

// Dataset-generation defaults: 2048 new tokens.
GenerationParams generation_defaults();
// Judging defaults: temperature 0, 1024 new tokens.
GenerationParams judge_defaults();

struct BackendConfig {
    std::string url;        // http(s)://host[:port][/prefix]
    std::string api_key;
    std::string model = "default";
    std::string backend_id; // defaults to model when empty
    Mode mode = Mode::replay;
    std::filesystem::path cache_path;
    double requests_per_second = 1.0;  // token bucket; <= 0 disables
    int max_in_flight = 4;
    int max_retries = 3;               // backoff 1s/2s/4s at the default base
    int retry_base_ms = 1000;
    int timeout_sec = 120;

    // Reads FORGE_BACKEND_URL, FORGE_BACKEND_KEY and FORGE_MODE.
    static BackendConfig from_env();
};

struct CompletionTranscript {
    std::string prompt_hash;  // content hash of (prompt, params, backend_id)
    std::optional<std::string> system;
    std::string prompt;
    GenerationParams params;
    std::string completion;
    std::string backend_id;
    std::string timestamp;
};

std::string prompt_hash(const prompts::PromptBundle& bundle, const GenerationParams& params,
                        std::string_view backend_id);

// Uniform completion interface over a chat-completions HTTP backend and a
// record/replay transcript cache. Shareable across threads: the cache takes
// concurrent reads with serialized appends, requests are rate limited, and
// in-flight calls are bounded by max_in_flight.
class Client {
public:
    explicit Client(BackendConfig config);

    // live/record: HTTP round trip with bounded retries on transient
    // failures, recording the transcript in record mode (a cached prompt is
    // served from the cache without another round trip). replay: cache
    // lookup only; a miss throws ReplayMissError.
    std::string generate(const prompts::PromptBundle& bundle, const GenerationParams& params);

    const BackendConfig& config() const { return config_; }
    std::size_t cache_size() const;

private:
    std::string http_generate(const prompts::PromptBundle& bundle,
                              const GenerationParams& params);
    void rate_limit_wait();
    void append_transcript(const CompletionTranscript& transcript);

    BackendConfig config_;

    mutable std::shared_mutex cache_mutex_;
    std::unordered_map<std::string, std::string> cache_;

    std::mutex rate_mutex_;
    std::chrono::steady_clock::time_point next_request_slot_{};

    std::mutex flight_mutex_;
    std::condition_variable flight_cv_;
    int in_flight_ = 0;

    std::mutex file_mutex_;
    std::ofstream cache_out_;
};

}  // namespace forge::llm
