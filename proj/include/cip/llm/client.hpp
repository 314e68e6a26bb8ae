#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "cip/core/error.hpp"

namespace cip::llm {

struct EndpointConfig {
    std::string base_url = "http://127.0.0.1:8000/v1";
    std::string model = "mock";
    std::string api_key_env;  // empty: no Authorization header
    double temperature = 0.7;
    int max_new_tokens = 1024;
    bool do_sample = true;
    int top_logprobs = 20;
    double timeout_seconds = 60.0;
    int max_retries = 3;
    int max_in_flight = 4;
    int backoff_initial_ms = 200;
    int backoff_max_ms = 5000;
    std::size_t label_position = 0;  // generated-token index holding the label

    void validate() const;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

struct TokenLogprobs {
    std::string token;
    double logprob = 0.0;
    std::vector<std::pair<std::string, double>> top;
};

struct ChatResult {
    std::string text;
    std::vector<TokenLogprobs> tokens;
    int attempts = 1;
};

// Admits callers in arrival order while at most `capacity` hold a slot.
class FifoGate {
public:
    explicit FifoGate(std::size_t capacity);
    void acquire();
    void release();

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::uint64_t next_ticket_ = 0;
    std::uint64_t serving_ = 0;
    std::size_t in_flight_ = 0;
    std::size_t capacity_;
};

class Client {
public:
    explicit Client(EndpointConfig cfg);

    const EndpointConfig& config() const noexcept { return cfg_; }
    ChatResult chat_logprobs(const std::vector<ChatMessage>& messages);

    // Request body as sent on the wire (exposed for digests and tests).
    std::string request_body(const std::vector<ChatMessage>& messages) const;

private:
    EndpointConfig cfg_;
    FifoGate gate_;
    std::atomic<std::uint64_t> request_counter_{0};
};

ChatResult chat_logprobs(Client& client, const std::vector<ChatMessage>& messages);

}  // namespace cip::llm
