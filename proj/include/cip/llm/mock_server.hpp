#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cip/llm/client.hpp"

namespace httplib {
class Server;
}

namespace cip::llm {

// FNV-1a 64 of the canonical JSON of {model, messages}, as 16 hex digits.
std::string request_digest(const std::string& request_body);

struct FixtureEntry {
    std::string response;          // chat-completions JSON body
    std::vector<int> failures;     // statuses served before the response
};

struct Fixture {
    bool synthesize = false;             // answer unmatched requests deterministically
    std::vector<std::string> synth_tokens;  // vocabulary for synthesised logprobs
    bool strip_logprobs = false;         // emulate an endpoint without logprob support
    std::map<std::string, FixtureEntry> entries;

    static Fixture parse(const std::string& json);
    static Fixture load(const std::filesystem::path& path);
    std::string to_json() const;
};

// Builds a chat-completions body: `text`, with a single generated token whose
// top logprobs are `top` (first entry is the sampled token).
std::string make_chat_response(const std::string& text, const std::vector<std::pair<std::string, double>>& top);

// Replays fixture responses over HTTP on 127.0.0.1. Served responses are
// recorded so a synthesised session can be saved as an exact fixture.
class MockServer {
public:
    explicit MockServer(Fixture fixture);
    ~MockServer();
    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    void start();
    void stop();
    int port() const noexcept { return port_; }
    std::string base_url() const;

    std::size_t requests() const noexcept { return requests_; }
    std::size_t misses() const noexcept { return misses_; }
    // Fixture with every response served so far, synthesis disabled.
    Fixture recorded() const;

private:
    std::string synthesize(const std::string& digest, const std::string& body) const;

    Fixture fixture_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
    mutable std::mutex mutex_;
    std::map<std::string, std::size_t> served_attempts_;
    std::map<std::string, std::string> recorded_;
    std::atomic<std::size_t> requests_{0};
    std::atomic<std::size_t> misses_{0};
};

}  // namespace cip::llm
