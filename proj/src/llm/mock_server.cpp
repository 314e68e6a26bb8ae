#include "cip/llm/mock_server.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "cip/core/rng.hpp"

namespace cip::llm {

using nlohmann::json;
using nlohmann::ordered_json;

std::string request_digest(const std::string& request_body) {
    json canonical;
    try {
        const auto j = json::parse(request_body);
        canonical = json{{"model", j.at("model")}, {"messages", j.at("messages")}};
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("request body: ") + e.what());
    }
    const std::string text = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Fixture Fixture::parse(const std::string& text) {
    Fixture f;
    try {
        const auto j = ordered_json::parse(text);
        f.synthesize = j.value("synthesize", false);
        f.strip_logprobs = j.value("strip_logprobs", false);
        if (j.contains("synth_tokens")) f.synth_tokens = j.at("synth_tokens").get<std::vector<std::string>>();
        if (j.contains("entries")) {
            for (const auto& e : j.at("entries")) {
                FixtureEntry entry;
                entry.response = e.at("response").dump();
                if (e.contains("failures")) entry.failures = e.at("failures").get<std::vector<int>>();
                f.entries[e.at("digest").get<std::string>()] = std::move(entry);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("mock fixture: ") + e.what());
    }
    return f;
}

Fixture Fixture::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open fixture " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Fixture::to_json() const {
    ordered_json j;
    j["synthesize"] = synthesize;
    j["synth_tokens"] = synth_tokens;
    j["strip_logprobs"] = strip_logprobs;
    auto& arr = j["entries"] = ordered_json::array();
    for (const auto& [digest, e] : entries) {
        ordered_json o;
        o["digest"] = digest;
        if (!e.failures.empty()) o["failures"] = e.failures;
        o["response"] = ordered_json::parse(e.response);
        arr.push_back(std::move(o));
    }
    return j.dump(1) + "\n";
}

std::string make_chat_response(const std::string& text, const std::vector<std::pair<std::string, double>>& top) {
    ordered_json tops = ordered_json::array();
    for (const auto& [tok, lp] : top) tops.push_back({{"token", tok}, {"logprob", lp}});
    ordered_json content = ordered_json::array();
    if (!top.empty()) {
        content.push_back({{"token", top.front().first}, {"logprob", top.front().second}, {"top_logprobs", tops}});
    }
    ordered_json body;
    body["id"] = "mock";
    body["object"] = "chat.completion";
    body["choices"] = ordered_json::array(
        {{{"index", 0},
          {"message", {{"role", "assistant"}, {"content", text}}},
          {"logprobs", {{"content", content}}},
          {"finish_reason", "stop"}}});
    return body.dump();
}

MockServer::MockServer(Fixture fixture) : fixture_(std::move(fixture)) {}

MockServer::~MockServer() { stop(); }

std::string MockServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

std::string MockServer::synthesize(const std::string& digest, const std::string& body) const {
    const auto j = json::parse(body);
    const std::string last = j.at("messages").back().at("content").get<std::string>();
    SeededRng rng(std::stoull(digest, nullptr, 16), 0);
    if (last.find("Now suggest") != std::string::npos) {
        std::string payload = "{\"questions\": [";
        for (int i = 0; i < 3; ++i) {
            if (i) payload += ", ";
            payload += "\"Synthetic question " + digest.substr(0, 6) + "-" + std::to_string(i + 1) + "?\"";
        }
        return make_chat_response(payload + "]}", {{"{", 0.0}});
    }
    if (fixture_.synth_tokens.empty()) return make_chat_response(rng.bernoulli(0.5) ? "Yes." : "No.", {{"Yes", -0.1}});
    std::vector<std::pair<std::string, double>> top;
    double norm = 0.0;
    for (const auto& tok : fixture_.synth_tokens) {
        const double logit = 8.0 * rng.uniform();
        top.emplace_back(tok, logit);
        norm += std::exp(logit);
    }
    for (auto& [tok, lp] : top) lp -= std::log(norm);
    std::stable_sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return make_chat_response(top.front().first + ".", top);
}

void MockServer::start() {
    server_ = std::make_unique<httplib::Server>();
    server_->Post(R"(.*/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
        ++requests_;
        std::string digest;
        try {
            digest = request_digest(req.body);
        } catch (const Error& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
            return;
        }
        std::string response;
        {
            std::lock_guard lock(mutex_);
            auto it = fixture_.entries.find(digest);
            if (it != fixture_.entries.end()) {
                const std::size_t attempt = served_attempts_[digest]++;
                if (attempt < it->second.failures.size()) {
                    res.status = it->second.failures[attempt];
                    res.set_content("{\"error\": \"scripted failure\"}", "application/json");
                    return;
                }
                response = it->second.response;
            } else if (fixture_.synthesize) {
                response = synthesize(digest, req.body);
            } else {
                ++misses_;
                res.status = 404;
                res.set_content("{\"error\": \"no fixture entry for digest " + digest + "\"}", "application/json");
                return;
            }
            recorded_[digest] = response;
        }
        if (fixture_.strip_logprobs) {
            auto j = ordered_json::parse(response);
            for (auto& c : j.at("choices")) c["logprobs"] = nullptr;
            response = j.dump();
        }
        res.set_content(response, "application/json");
    });
    port_ = server_->bind_to_any_port("127.0.0.1");
    if (port_ <= 0) fail(ErrorKind::transport, "mock server could not bind");
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void MockServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
}

Fixture MockServer::recorded() const {
    std::lock_guard lock(mutex_);
    Fixture f;
    f.synth_tokens = fixture_.synth_tokens;
    f.strip_logprobs = fixture_.strip_logprobs;
    for (const auto& [digest, body] : recorded_) f.entries[digest] = FixtureEntry{body, {}};
    return f;
}

}  // namespace cip::llm
