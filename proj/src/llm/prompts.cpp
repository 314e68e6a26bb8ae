#include "cip/llm/prompts.hpp"

#include "cip/core/error.hpp"

namespace cip::llm {

namespace {

const std::map<PromptRole, std::string>& templates() {
    static const std::map<PromptRole, std::string> t{
        {PromptRole::querier_system,
         "You are an expert on animals. Your goal is to predict the animal given the information you have "
         "gathered. The animal must be one of the following: {class_names}. Be as precise and as direct as "
         "possible. You may provide your reasoning first before making a prediction. End your response by making "
         "a guess and saying 'The animal is: X' (e.g. The animal is: dog) at the end of your reasoning, where X is "
         "your guess. Do not provide any additional information. Your response should all fit in a single "
         "paragraph. If you are not provided any information, make a random guess."},
        {PromptRole::querier_posterior,
         "{history_block}\n\nGiven the information you have gathered, make an intermediate SINGLE prediction of "
         "what you think the animal is. First make your guess in the format 'The animal is: X' (e.g. The animal "
         "is: dog), where X is your guess, then provide your reasoning. Do not provide any additional "
         "information. Your response should all fit in a single paragraph. Make sure your prediction is one of "
         "the classes: {class_names}."},
        {PromptRole::querier_propose,
         "{history_block}\n\nNow suggest {m} questions.\nReturn the question in this format:\n"
         "{{\"questions\": [\"QUESTION_1\", \"QUESTION_2\", \"QUESTION_3\"]}}"},
        {PromptRole::answerer_freetext,
         "You are an expert on {label}. Based on the question provided, answer truthfully about the question. Do "
         "not directly tell the other player what you are thinking. Be as precise and as direct as possible, and "
         "answer in complete sentence. For example, if the question is \"Does the animal have a tail?\", you can "
         "answer \"The animal has a tail.\" without saying yes or no. Do not say the name of the animal in your "
         "answer."},
        {PromptRole::answerer_binary,
         "You are an expert on {label}. Based on the question provided, answer truthfully about the question. Do "
         "not directly tell the other player what you are thinking. Be as precise and as direct as possible, and "
         "answer with a single word. For example, if the question is \"Does the animal have a tail?\", you can "
         "answer \"Yes.\" or \"No.\". Do not say the name of the animal in your answer. If you don't know the "
         "answer, make a guess. Do not answer anything other than \"Yes.\" or \"No.\"."},
        {PromptRole::expert_mediq_system,
         "You are a medical doctor specialized in {specialty}, trained to provide accurate, evidence-based "
         "responses to medical inquiries. Your goal is to answer questions with clarity, precision, and "
         "professionalism while ensuring your responses align with established medical guidelines. Answer "
         "concisely, accurately, and compassionately. Make a prediction and provide your reasoning as "
         "explanation. Respond in the following format:\n\n"
         "{{\"answer\": \"A/B/C/D\", \"explanation\": \"YOUR EXPLANATION HERE\"}}"},
        {PromptRole::expert_mediq_input,
         "Answer the multiple choice based on the context.\n\nContext: {context}\n\nQuestion: {question}\n\n"
         "Options:\n{options}\n\nPlease select the most appropriate answer ({letters})."},
        {PromptRole::fact_to_question_system,
         "Convert the medical fact into a question, in which the answer is the fact itself. The question should "
         "be specific and relevant to the patient's condition. Please do not ask any questions that are not "
         "related to the patient's medical history or condition. Suggest one question only. Return only your "
         "question and nothing else.\n\nMedical fact: He has a non-productive cough for 4 months.\nQuestion: What "
         "are some preliminary symptoms?\n\nMedical fact: He complains of nausea and 1 episode of vomiting during "
         "the past day.\nQuestion: Did the patient complain about nausea?"},
        {PromptRole::fact_to_question_input, "Medical fact: {fact}"},
    };
    return t;
}

}  // namespace

const std::string& template_text(PromptRole role) { return templates().at(role); }

std::string render_template(const std::string& text, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '{' || c == '}') && i + 1 < text.size() && text[i + 1] == c) {
            out += c;
            ++i;
            continue;
        }
        if (c == '{') {
            const auto close = text.find('}', i);
            if (close == std::string::npos) fail(ErrorKind::configuration, "unterminated placeholder in template");
            const std::string name = text.substr(i + 1, close - i - 1);
            auto it = vars.find(name);
            if (it == vars.end()) fail(ErrorKind::configuration, "unresolved placeholder {" + name + "}");
            out += it->second;
            i = close;
            continue;
        }
        out += c;
    }
    return out;
}

std::string render(PromptRole role, const std::map<std::string, std::string>& vars) {
    return render_template(template_text(role), vars);
}

}  // namespace cip::llm
