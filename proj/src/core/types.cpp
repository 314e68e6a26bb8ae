#include "cip/core/types.hpp"

#include <set>

#include "cip/core/error.hpp"

namespace cip {

LabelSpace::LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) fail(ErrorKind::invalid_input, "label space needs at least 2 labels");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].empty()) fail(ErrorKind::invalid_input, "empty label at index " + std::to_string(i));
        if (!index_.emplace(labels_[i], i).second) {
            fail(ErrorKind::invalid_input, "duplicate label '" + labels_[i] + "'");
        }
    }
}

const std::string& LabelSpace::name(std::size_t index) const {
    if (index >= labels_.size()) fail(ErrorKind::shape, "label index out of range");
    return labels_[index];
}

std::optional<std::size_t> LabelSpace::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TokenMap::TokenMap(std::map<std::string, std::string> first_tokens) : first_(std::move(first_tokens)) {}

TokenMap TokenMap::leading_word(const LabelSpace& labels) {
    std::map<std::string, std::string> m;
    for (const auto& label : labels.names()) m[label] = label.substr(0, label.find(' '));
    return TokenMap(std::move(m));
}

const std::string& TokenMap::first_token(const std::string& label) const {
    auto it = first_.find(label);
    if (it == first_.end()) fail(ErrorKind::configuration, "no first token for label '" + label + "'");
    return it->second;
}

void check_first_tokens(const LabelSpace& labels, const TokenMap& tokens) {
    std::map<std::string, std::string> owner;
    for (const auto& label : labels.names()) {
        const auto& tok = tokens.first_token(label);
        auto [it, inserted] = owner.emplace(tok, label);
        if (!inserted) {
            fail(ErrorKind::configuration, "labels '" + it->second + "' and '" + label +
                                               "' share first token '" + tok + "'");
        }
    }
}

EnumeratedLabels enumerate_labels(const LabelSpace& labels, EnumerationStyle style) {
    if (style == EnumerationStyle::letters && labels.size() > 26) {
        fail(ErrorKind::configuration, "letter enumeration supports at most 26 labels");
    }
    std::vector<std::string> names;
    std::map<std::string, std::string> tokens;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::string tag = style == EnumerationStyle::numbers ? std::to_string(i + 1)
                                                             : std::string(1, static_cast<char>('A' + i));
        names.push_back(tag + ". " + labels.name(i));
        tokens[names.back()] = tag;
    }
    return {LabelSpace(std::move(names)), TokenMap(std::move(tokens))};
}

Query::Query(std::string id_, std::string text_, QueryOrigin origin_)
    : id(std::move(id_)), text(std::move(text_)), origin(origin_) {
    if (id.empty()) fail(ErrorKind::invalid_input, "query id must be nonempty");
    if (text.empty()) fail(ErrorKind::invalid_input, "query '" + id + "' has empty text");
}

Answer Answer::yes() { return Answer(AnswerKind::binary, "yes"); }
Answer Answer::no() { return Answer(AnswerKind::binary, "no"); }
Answer Answer::binary(bool value) { return value ? yes() : no(); }

Answer Answer::free_text(std::string text) {
    if (text.empty()) fail(ErrorKind::invalid_input, "free-text answer must be nonempty");
    return Answer(AnswerKind::free_text, std::move(text));
}

std::string Answer::sentence() const {
    if (kind_ == AnswerKind::binary) return value_ == "yes" ? "Yes." : "No.";
    return value_;
}

bool History::contains(const std::string& query_id) const {
    for (const auto& e : entries_) {
        if (e.query.id == query_id) return true;
    }
    return false;
}

History History::prefix(std::size_t k) const {
    if (k > entries_.size()) fail(ErrorKind::shape, "prefix longer than history");
    History out(closed_);
    out.entries_.assign(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

History History::extend(const Query& q, const Answer& a) const {
    if (closed_ && contains(q.id)) {
        fail(ErrorKind::duplicate_query, "query '" + q.id + "' already asked");
    }
    History out = *this;
    out.entries_.push_back({q, a});
    return out;
}

History history_extend(const History& h, const Query& q, const Answer& a) { return h.extend(q, a); }

std::string render_history(const History& h, RenderStyle style) {
    if (h.empty()) return kEmptyHistoryLine;
    std::string out;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const auto& e = h[i];
        if (i) out += '\n';
        if (style == RenderStyle::enumerated) {
            out += std::to_string(i + 1) + ". " + e.query.text + " " + e.answer.sentence();
        } else {
            out += "Q: " + e.query.text + "\nA: " + e.answer.sentence();
        }
    }
    return out;
}

}  // namespace cip
