#pragma once

#include <map>
#include <string>

namespace cip::llm {

enum class PromptRole {
    querier_system,
    querier_posterior,
    querier_propose,
    answerer_binary,
    answerer_freetext,
    expert_mediq_system,
    expert_mediq_input,
    fact_to_question_system,
    fact_to_question_input,
};

const std::string& template_text(PromptRole role);

// Substitutes {name} placeholders; "{{" and "}}" render as literal braces.
// Unresolved placeholders raise a configuration error.
std::string render_template(const std::string& text, const std::map<std::string, std::string>& vars);
std::string render(PromptRole role, const std::map<std::string, std::string>& vars);

}  // namespace cip::llm
