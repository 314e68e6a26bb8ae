#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cip {

class LabelSpace {
public:
    explicit LabelSpace(std::vector<std::string> labels);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::string& name(std::size_t index) const;
    std::optional<std::size_t> index_of(const std::string& name) const;
    const std::vector<std::string>& names() const noexcept { return labels_; }

    bool operator==(const LabelSpace& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
    std::map<std::string, std::size_t> index_;
};

// First-token map used when reading label probabilities from token logits.
class TokenMap {
public:
    TokenMap() = default;
    explicit TokenMap(std::map<std::string, std::string> first_tokens);

    // Default tokenisation: the label text up to its first space.
    static TokenMap leading_word(const LabelSpace& labels);

    const std::string& first_token(const std::string& label) const;
    bool contains(const std::string& label) const { return first_.count(label) != 0; }
    const std::map<std::string, std::string>& entries() const noexcept { return first_; }

private:
    std::map<std::string, std::string> first_;
};

// Throws a configuration error when two labels share a first token or a label
// has no entry in the map.
void check_first_tokens(const LabelSpace& labels, const TokenMap& tokens);

enum class EnumerationStyle { numbers, letters };

struct EnumeratedLabels {
    LabelSpace labels;
    TokenMap tokens;
};

// Opt-in escape hatch for colliding first tokens: prefix each label with its
// position ("1. ", "2. " or "A. ", "B. ") and key the token map on the prefix.
EnumeratedLabels enumerate_labels(const LabelSpace& labels, EnumerationStyle style);

enum class QueryOrigin { closed_set, proposed };

struct Query {
    std::string id;
    std::string text;
    QueryOrigin origin = QueryOrigin::closed_set;

    Query() = default;
    Query(std::string id_, std::string text_, QueryOrigin origin_ = QueryOrigin::closed_set);

    bool operator==(const Query& other) const {
        return id == other.id && text == other.text && origin == other.origin;
    }
};

enum class AnswerKind { binary, free_text };

class Answer {
public:
    static Answer yes();
    static Answer no();
    static Answer binary(bool value);
    static Answer free_text(std::string text);

    AnswerKind kind() const noexcept { return kind_; }
    const std::string& value() const noexcept { return value_; }
    bool is_yes() const { return kind_ == AnswerKind::binary && value_ == "yes"; }

    // "Yes." / "No." for binary answers, the text itself otherwise.
    std::string sentence() const;

    bool operator==(const Answer& other) const {
        return kind_ == other.kind_ && value_ == other.value_;
    }

private:
    Answer(AnswerKind kind, std::string value) : kind_(kind), value_(std::move(value)) {}

    AnswerKind kind_;
    std::string value_;
};

struct HistoryEntry {
    Query query;
    Answer answer;
};

class History {
public:
    explicit History(bool closed_set = true) : closed_(closed_set) {}

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    bool closed_set() const noexcept { return closed_; }
    const std::vector<HistoryEntry>& entries() const noexcept { return entries_; }
    const HistoryEntry& operator[](std::size_t i) const { return entries_.at(i); }

    bool contains(const std::string& query_id) const;
    History prefix(std::size_t k) const;
    History extend(const Query& q, const Answer& a) const;

private:
    bool closed_;
    std::vector<HistoryEntry> entries_;
};

History history_extend(const History& h, const Query& q, const Answer& a);

enum class RenderStyle { enumerated, transcript };

inline constexpr const char* kEmptyHistoryLine = "You have not gathered any information yet.";

std::string render_history(const History& h, RenderStyle style = RenderStyle::enumerated);

}  // namespace cip
