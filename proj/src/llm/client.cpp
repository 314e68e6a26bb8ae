#include "cip/llm/client.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace cip::llm {

using nlohmann::ordered_json;

void EndpointConfig::validate() const {
    if (!(timeout_seconds > 0.0)) fail(ErrorKind::configuration, "timeout must be positive");
    if (max_retries < 0) fail(ErrorKind::configuration, "max retries must be >= 0");
    if (max_in_flight < 1) fail(ErrorKind::configuration, "max in-flight must be >= 1");
    if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
        fail(ErrorKind::configuration, "base URL must start with http:// or https://");
    }
}

FifoGate::FifoGate(std::size_t capacity) : capacity_(capacity) {}

void FifoGate::acquire() {
    std::unique_lock lock(mutex_);
    const std::uint64_t ticket = next_ticket_++;
    cv_.wait(lock, [&] { return ticket == serving_ && in_flight_ < capacity_; });
    ++serving_;
    ++in_flight_;
    cv_.notify_all();
}

void FifoGate::release() {
    std::lock_guard lock(mutex_);
    --in_flight_;
    cv_.notify_all();
}

namespace {

struct GateSlot {
    explicit GateSlot(FifoGate& g) : gate(g) { gate.acquire(); }
    ~GateSlot() { gate.release(); }
    FifoGate& gate;
};

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://") + 3;
    const auto path_start = url.find('/', scheme_end);
    if (path_start == std::string::npos) return {url, ""};
    std::string path = url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, path_start), path};
}

ChatResult parse_response(const std::string& body) {
    ordered_json j;
    try {
        j = ordered_json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::transport, std::string("malformed response body: ") + e.what());
    }
    ChatResult out;
    try {
        const auto& choice = j.at("choices").at(0);
        const auto& content = choice.at("message").at("content");
        out.text = content.is_null() ? "" : content.get<std::string>();
        auto lp = choice.find("logprobs");
        if (lp == choice.end() || lp->is_null() || !lp->contains("content") || lp->at("content").is_null()) {
            fail(ErrorKind::capability, "endpoint returned no token logprobs");
        }
        for (const auto& t : lp->at("content")) {
            TokenLogprobs tok;
            tok.token = t.at("token").get<std::string>();
            tok.logprob = t.at("logprob").get<double>();
            if (t.contains("top_logprobs")) {
                for (const auto& alt : t.at("top_logprobs")) {
                    tok.top.emplace_back(alt.at("token").get<std::string>(), alt.at("logprob").get<double>());
                }
            }
            out.tokens.push_back(std::move(tok));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::transport, std::string("unexpected response shape: ") + e.what());
    }
    return out;
}

}  // namespace

Client::Client(EndpointConfig cfg) : cfg_(std::move(cfg)), gate_(static_cast<std::size_t>(std::max(1, cfg_.max_in_flight))) {
    cfg_.validate();
}

std::string Client::request_body(const std::vector<ChatMessage>& messages) const {
    ordered_json body;
    body["model"] = cfg_.model;
    auto& msgs = body["messages"] = ordered_json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["temperature"] = cfg_.do_sample ? cfg_.temperature : 0.0;
    body["max_tokens"] = cfg_.max_new_tokens;
    body["logprobs"] = true;
    body["top_logprobs"] = cfg_.top_logprobs;
    body["n"] = 1;
    return body.dump();
}

ChatResult Client::chat_logprobs(const std::vector<ChatMessage>& messages) {
    const auto [host, prefix] = split_url(cfg_.base_url);
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        const char* key = std::getenv(cfg_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            fail(ErrorKind::configuration, "environment variable " + cfg_.api_key_env + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    headers.emplace("X-Request-Id", std::to_string(++request_counter_));
    const std::string body = request_body(messages);

    GateSlot slot(gate_);
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            const long delay = std::min<long>(cfg_.backoff_max_ms, static_cast<long>(cfg_.backoff_initial_ms) << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        httplib::Client http(host);
        const auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
        http.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        http.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        http.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        auto res = http.Post(prefix + "/chat/completions", headers, body, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) fail(ErrorKind::transport, "HTTP " + std::to_string(res->status) + ": " + res->body);
        ChatResult out = parse_response(res->body);
        out.attempts = attempt + 1;
        return out;
    }
    fail(ErrorKind::transport, "giving up after " + std::to_string(cfg_.max_retries + 1) + " attempts: " + last_error);
}

ChatResult chat_logprobs(Client& client, const std::vector<ChatMessage>& messages) {
    return client.chat_logprobs(messages);
}

}  // namespace cip::llm
