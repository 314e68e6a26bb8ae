#pragma once

#include <string>
#include <vector>

#include "cip/core.hpp"
#include "cip/llm/client.hpp"
#include "cip/llm/prompts.hpp"
#include "cip/worlds/instance_world.hpp"

namespace cip::llm {

// "You have not gathered ..." sentinel, or the gathered-information header
// followed by the enumerated history.
std::string history_block(const History& h);
std::string join_labels(const LabelSpace& labels);

// Softmax over the label first-token logprobs found at the configured
// generated-token position.
Distribution posterior_from_result(const ChatResult& result, std::size_t position, const LabelSpace& labels,
                                   const TokenMap& tokens);

Distribution posterior_from_llm(Client& client, const History& h, const LabelSpace& labels, const TokenMap& tokens);

std::vector<Query> parse_question_payload(const std::string& text);
std::vector<Query> propose_queries(Client& client, const History& h, std::size_t m, const LabelSpace& labels);

enum class AnswerRole { binary, free_text };

// Parses a leading "Yes"/"No" (case-insensitive); nullopt otherwise.
std::optional<bool> parse_yes_no(const std::string& text);
Answer answer_as_oracle(Client& client, AnswerRole role, const Query& q, const std::string& subject_label);

class LlmPredictor : public Predictor {
public:
    LlmPredictor(Client& client, LabelSpace labels, TokenMap tokens);
    Distribution predict(const History& h, const Subject& s) const override;

private:
    Client& client_;
    LabelSpace labels_;
    TokenMap tokens_;
};

// Multiple-choice posterior for instance worlds, options keyed by letter.
class LlmInstancePredictor : public Predictor {
public:
    LlmInstancePredictor(Client& client, const InstanceWorld& world) : client_(client), world_(world) {}
    Distribution predict(const History& h, const Subject& s) const override;

private:
    Client& client_;
    const InstanceWorld& world_;
};

class LlmProposer : public QueryProposer {
public:
    LlmProposer(Client& client, LabelSpace labels) : client_(client), labels_(std::move(labels)) {}
    std::vector<Query> propose(const History& h, std::size_t m, const Subject& subject) const override;

private:
    Client& client_;
    LabelSpace labels_;
};

class LlmAnswerer : public Answerer {
public:
    LlmAnswerer(Client& client, AnswerRole role, std::string subject_label)
        : client_(client), role_(role), label_(std::move(subject_label)) {}
    std::optional<Answer> answer(const Query& q, SeededRng& rng) override;

private:
    Client& client_;
    AnswerRole role_;
    std::string label_;
};

}  // namespace cip::llm
