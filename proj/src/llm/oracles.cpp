#include "cip/llm/oracles.hpp"

#include <cctype>
#include <cmath>
#include <map>

#include <json.hpp>

namespace cip::llm {

std::string history_block(const History& h) {
    if (h.empty()) return std::string(kEmptyHistoryLine) + " Please make a random guess.";
    return "Here is the information you have gathered.\n" + render_history(h, RenderStyle::enumerated);
}

std::string join_labels(const LabelSpace& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ", ";
        out += labels.name(i);
    }
    return out;
}

namespace {

std::string strip_token(const std::string& token) {
    std::size_t start = 0;
    while (start < token.size() && std::isspace(static_cast<unsigned char>(token[start]))) ++start;
    // Byte-level BPE vocabularies mark a leading space with "Ġ" (0xC4 0xA0).
    if (token.compare(start, 2, "\xC4\xA0") == 0) start += 2;
    return token.substr(start);
}

std::vector<ChatMessage> querier_messages(const LabelSpace& labels, const std::string& user) {
    return {{"system", render(PromptRole::querier_system, {{"class_names", join_labels(labels)}})}, {"user", user}};
}

}  // namespace

Distribution posterior_from_result(const ChatResult& result, std::size_t position, const LabelSpace& labels,
                                   const TokenMap& tokens) {
    check_first_tokens(labels, tokens);
    if (position >= result.tokens.size()) {
        fail(ErrorKind::missing_logit, "completion has no token at position " + std::to_string(position));
    }
    std::map<std::string, double> seen;
    for (const auto& [tok, lp] : result.tokens[position].top) seen.emplace(strip_token(tok), lp);
    seen.emplace(strip_token(result.tokens[position].token), result.tokens[position].logprob);

    std::vector<double> logits;
    for (const auto& label : labels.names()) {
        auto it = seen.find(tokens.first_token(label));
        if (it == seen.end()) fail(ErrorKind::missing_logit, "no logprob for label '" + label + "'");
        logits.push_back(it->second);
    }
    return softmax(logits, labels.size());
}

Distribution posterior_from_llm(Client& client, const History& h, const LabelSpace& labels, const TokenMap& tokens) {
    check_first_tokens(labels, tokens);
    const std::string user =
        render(PromptRole::querier_posterior, {{"history_block", history_block(h)}, {"class_names", join_labels(labels)}});
    const auto result = client.chat_logprobs(querier_messages(labels, user));
    return posterior_from_result(result, client.config().label_position, labels, tokens);
}

std::vector<Query> parse_question_payload(const std::string& text) {
    const auto open = text.find('{');
    const auto close = text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        fail(ErrorKind::proposal, "no JSON object in proposal");
    }
    std::vector<Query> out;
    try {
        const auto j = nlohmann::json::parse(text.substr(open, close - open + 1));
        for (const auto& q : j.at("questions")) {
            const auto s = q.get<std::string>();
            if (s.empty()) fail(ErrorKind::proposal, "empty proposed question");
            out.emplace_back("proposed", s, QueryOrigin::proposed);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::proposal, std::string("malformed proposal: ") + e.what());
    }
    return out;
}

std::vector<Query> propose_queries(Client& client, const History& h, std::size_t m, const LabelSpace& labels) {
    if (m < 1) fail(ErrorKind::invalid_input, "m must be at least 1");
    const std::string user =
        render(PromptRole::querier_propose, {{"history_block", history_block(h)}, {"m", std::to_string(m)}});
    const auto messages = querier_messages(labels, user);
    std::string problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<Query> qs;
        try {
            qs = parse_question_payload(client.chat_logprobs(messages).text);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::proposal) throw;
            problem = e.what();
            continue;
        }
        if (qs.size() < m) {
            problem = "expected " + std::to_string(m) + " questions, got " + std::to_string(qs.size());
            continue;
        }
        qs.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            qs[j].id = "p" + std::to_string(h.size() + 1) + "." + std::to_string(j + 1);
        }
        return qs;
    }
    fail(ErrorKind::proposal, "proposal failed twice: " + problem);
}

std::optional<bool> parse_yes_no(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    auto word_at = [&](const char* w) {
        const std::size_t n = std::char_traits<char>::length(w);
        if (text.size() - i < n) return false;
        for (std::size_t k = 0; k < n; ++k) {
            if (std::tolower(static_cast<unsigned char>(text[i + k])) != w[k]) return false;
        }
        return i + n == text.size() || !std::isalpha(static_cast<unsigned char>(text[i + n]));
    };
    if (word_at("yes")) return true;
    if (word_at("no")) return false;
    return std::nullopt;
}

Answer answer_as_oracle(Client& client, AnswerRole role, const Query& q, const std::string& subject_label) {
    const PromptRole prompt = role == AnswerRole::binary ? PromptRole::answerer_binary : PromptRole::answerer_freetext;
    const std::vector<ChatMessage> messages{{"system", render(prompt, {{"label", subject_label}})}, {"user", q.text}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string text = client.chat_logprobs(messages).text;
        if (role == AnswerRole::free_text) {
            if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            return Answer::free_text(text);
        }
        if (auto yn = parse_yes_no(text)) return Answer::binary(*yn);
    }
    fail(ErrorKind::answer, "answerer did not produce a valid answer to '" + q.text + "'");
}

LlmPredictor::LlmPredictor(Client& client, LabelSpace labels, TokenMap tokens)
    : client_(client), labels_(std::move(labels)), tokens_(std::move(tokens)) {
    check_first_tokens(labels_, tokens_);
}

Distribution LlmPredictor::predict(const History& h, const Subject&) const {
    return posterior_from_llm(client_, h, labels_, tokens_);
}

Distribution LlmInstancePredictor::predict(const History& h, const Subject& s) const {
    const auto& inst = world_.instance(s.instance);
    const auto enumerated = enumerate_labels(inst.options, EnumerationStyle::letters);
    std::string options;
    std::string letters;
    for (std::size_t i = 0; i < inst.options.size(); ++i) {
        const std::string letter(1, static_cast<char>('A' + i));
        if (i) {
            options += "\n";
            letters += "/";
        }
        options += "    " + letter + " - " + inst.options.name(i);
        letters += letter;
    }
    std::string context = inst.context;
    if (!h.empty()) context += "\n" + render_history(h, RenderStyle::enumerated);
    const std::vector<ChatMessage> messages{
        {"system", render(PromptRole::expert_mediq_system,
                          {{"specialty", inst.specialty.empty() ? "internal medicine" : inst.specialty}})},
        {"user", render(PromptRole::expert_mediq_input,
                        {{"context", context}, {"question", inst.question}, {"options", options}, {"letters", letters}})}};
    const auto result = client_.chat_logprobs(messages);
    return posterior_from_result(result, client_.config().label_position, enumerated.labels, enumerated.tokens);
}

std::vector<Query> LlmProposer::propose(const History& h, std::size_t m, const Subject&) const {
    return propose_queries(client_, h, m, labels_);
}

std::optional<Answer> LlmAnswerer::answer(const Query& q, SeededRng&) {
    return answer_as_oracle(client_, role_, q, label_);
}

}  // namespace cip::llm
