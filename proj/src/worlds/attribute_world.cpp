#include "cip/worlds/attribute_world.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cip/worlds/csv.hpp"

namespace cip {

AttributeWorld::AttributeWorld(LabelSpace labels, std::vector<Query> queries,
                               std::vector<std::vector<std::uint8_t>> matrix, Distribution prior,
                               double answer_noise)
    : labels_(std::move(labels)),
      queries_(std::move(queries)),
      matrix_(std::move(matrix)),
      prior_(std::move(prior)),
      noise_(answer_noise) {
    if (queries_.empty()) fail(ErrorKind::invalid_input, "attribute world needs at least one query");
    if (matrix_.size() != labels_.size()) fail(ErrorKind::shape, "matrix rows do not match label count");
    for (const auto& row : matrix_) {
        if (row.size() != queries_.size()) fail(ErrorKind::shape, "matrix columns do not match query count");
    }
    if (prior_.size() != labels_.size()) fail(ErrorKind::shape, "prior length does not match label count");
    if (!(noise_ >= 0.0 && noise_ < 0.5)) fail(ErrorKind::invalid_input, "answer noise must lie in [0, 0.5)");
    for (std::size_t j = 0; j < queries_.size(); ++j) {
        if (!by_id_.emplace(queries_[j].id, j).second) {
            fail(ErrorKind::duplicate_query, "duplicate query id '" + queries_[j].id + "'");
        }
        by_text_.emplace(queries_[j].text, j);
    }
}

std::optional<std::size_t> AttributeWorld::query_index(const Query& q) const {
    if (auto it = by_id_.find(q.id); it != by_id_.end()) return it->second;
    if (auto it = by_text_.find(q.text); it != by_text_.end()) return it->second;
    return std::nullopt;
}

std::size_t AttributeWorld::require_query_index(const Query& q) const {
    auto j = query_index(q);
    if (!j) fail(ErrorKind::lookup, "unknown query '" + q.id + "'");
    return *j;
}

AttributeWorld AttributeWorld::with_noise(double answer_noise) const {
    return AttributeWorld(labels_, queries_, matrix_, prior_, answer_noise);
}

std::vector<AnswerOutcome> AttributeWorld::answer_outcomes(std::size_t subject, const Query& q) const {
    const bool truth = attribute(subject, require_query_index(q));
    if (noise_ == 0.0) return {{Answer::binary(truth), 1.0}};
    return {{Answer::binary(truth), 1.0 - noise_}, {Answer::binary(!truth), noise_}};
}

std::vector<double> posterior_weights(const AttributeWorld& w, const History& h) {
    std::vector<double> weights = w.prior().probs();
    const double eps = w.answer_noise();
    for (const auto& e : h.entries()) {
        if (e.answer.kind() != AnswerKind::binary) {
            fail(ErrorKind::invalid_input, "attribute worlds only interpret binary answers");
        }
        const std::size_t j = w.require_query_index(e.query);
        const bool said_yes = e.answer.is_yes();
        for (std::size_t y = 0; y < weights.size(); ++y) {
            weights[y] *= (w.attribute(y, j) == said_yes) ? 1.0 - eps : eps;
        }
    }
    return weights;
}

Distribution exact_posterior(const AttributeWorld& w, const History& h) {
    auto weights = posterior_weights(w, h);
    double total = 0.0;
    for (double v : weights) total += v;
    if (!(total > 0.0)) fail(ErrorKind::empty_support, "history is inconsistent with every label");
    return Distribution::floored(std::move(weights));
}

Answer answer_query(const AttributeWorld& w, std::size_t label, const Query& q, SeededRng& rng) {
    if (label >= w.num_classes()) fail(ErrorKind::lookup, "unknown label index");
    const bool truth = w.attribute(label, w.require_query_index(q));
    const bool flip = w.answer_noise() > 0.0 && rng.bernoulli(w.answer_noise());
    return Answer::binary(truth != flip);
}

namespace {

constexpr const char* kPriorColumn = "prior";

}  // namespace

AttributeWorld parse_attribute_csv(std::istream& in, double answer_noise) {
    const auto rows = read_csv(in);
    if (rows.empty()) fail(ErrorKind::parse, "empty attribute file", 1);
    const auto& header = rows.front();
    if (header.size() < 2) fail(ErrorKind::parse, "header needs a class column and at least one query", 1);

    std::optional<std::size_t> prior_col;
    std::vector<Query> queries;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c] == kPriorColumn) {
            if (prior_col) fail(ErrorKind::parse, "more than one prior column", 1, c + 1);
            prior_col = c;
            continue;
        }
        if (header[c].empty()) fail(ErrorKind::parse, "empty query text", 1, c + 1);
        queries.emplace_back("q" + std::to_string(queries.size() + 1), header[c]);
    }
    if (queries.empty()) fail(ErrorKind::parse, "no query columns", 1);

    std::vector<std::string> names;
    std::set<std::string> seen;
    std::vector<std::vector<std::uint8_t>> matrix;
    std::vector<double> prior;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t line = r + 1;
        if (row.size() == 1 && row[0].empty()) continue;  // blank line
        if (row.size() != header.size()) {
            fail(ErrorKind::parse,
                 "expected " + std::to_string(header.size()) + " cells, found " + std::to_string(row.size()),
                 line, std::min(row.size(), header.size()) + 1);
        }
        if (row[0].empty()) fail(ErrorKind::parse, "empty class name", line, 1);
        if (!seen.insert(row[0]).second) fail(ErrorKind::parse, "duplicate class '" + row[0] + "'", line, 1);
        names.push_back(row[0]);
        std::vector<std::uint8_t> cells;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (prior_col && c == *prior_col) {
                char* end = nullptr;
                const double v = std::strtod(row[c].c_str(), &end);
                if (row[c].empty() || *end != '\0' || !std::isfinite(v) || v < 0.0) {
                    fail(ErrorKind::parse, "prior cell must be a nonnegative number", line, c + 1);
                }
                prior.push_back(v);
                continue;
            }
            if (row[c] == "1") cells.push_back(1);
            else if (row[c] == "0") cells.push_back(0);
            else fail(ErrorKind::parse, "cell '" + row[c] + "' is not 0 or 1", line, c + 1);
        }
        matrix.push_back(std::move(cells));
    }
    if (names.size() < 2) fail(ErrorKind::parse, "need at least two class rows");
    Distribution p = prior_col ? Distribution::floored(prior) : Distribution::uniform(names.size());
    return AttributeWorld(LabelSpace(std::move(names)), std::move(queries), std::move(matrix), std::move(p),
                          answer_noise);
}

AttributeWorld load_attribute_world(const std::filesystem::path& path, double answer_noise) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    return parse_attribute_csv(in, answer_noise);
}

std::string to_attribute_csv(const AttributeWorld& w) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"class"};
    for (const auto& q : w.queries()) header.push_back(q.text);
    rows.push_back(std::move(header));
    for (std::size_t y = 0; y < w.num_classes(); ++y) {
        std::vector<std::string> row{w.labels().name(y)};
        for (std::size_t j = 0; j < w.num_queries(); ++j) row.push_back(w.attribute(y, j) ? "1" : "0");
        rows.push_back(std::move(row));
    }
    return write_csv(rows);
}

const std::vector<std::string>& animal_class_names() {
    static const std::vector<std::string> names{
        "giraffe", "zebra",       "elephant",   "killer whale", "dalmatian",    "polar bear", "giant panda",
        "hippopotamus", "rhinoceros", "lion",  "tiger",        "blue whale",   "walrus",     "grizzly bear",
        "siamese cat",  "cow",        "german shepherd", "gorilla", "dolphin", "moose"};
    return names;
}

AttributeWorld make_synthetic_attribute_world(const SyntheticAttributeSpec& spec) {
    if (spec.classes < 2 || spec.queries < 1) fail(ErrorKind::invalid_input, "synthetic world too small");
    if (!(spec.min_prevalence >= 0.0 && spec.min_prevalence <= spec.max_prevalence && spec.max_prevalence <= 1.0)) {
        fail(ErrorKind::invalid_input, "bad prevalence range");
    }
    SeededRng rng(spec.seed, 0x57a7);
    std::vector<double> prevalence(spec.queries);
    for (double& p : prevalence) p = spec.min_prevalence + (spec.max_prevalence - spec.min_prevalence) * rng.uniform();

    std::vector<std::vector<std::uint8_t>> matrix;
    std::set<std::vector<std::uint8_t>> signatures;
    std::size_t attempts = 0;
    while (matrix.size() < spec.classes) {
        if (++attempts > 1000 * spec.classes) fail(ErrorKind::invalid_input, "cannot draw distinct class signatures");
        std::vector<std::uint8_t> row(spec.queries);
        for (std::size_t j = 0; j < spec.queries; ++j) row[j] = rng.bernoulli(prevalence[j]) ? 1 : 0;
        if (signatures.insert(row).second) matrix.push_back(std::move(row));
    }

    std::vector<std::string> names;
    const auto& animals = animal_class_names();
    for (std::size_t y = 0; y < spec.classes; ++y) {
        names.push_back(spec.classes <= animals.size() ? animals[y] : "class " + std::to_string(y + 1));
    }
    std::vector<Query> queries;
    for (std::size_t j = 0; j < spec.queries; ++j) {
        queries.emplace_back("q" + std::to_string(j + 1), "Does it have attribute " + std::to_string(j + 1) + "?");
    }
    return AttributeWorld(LabelSpace(std::move(names)), std::move(queries), std::move(matrix),
                          Distribution::uniform(spec.classes), spec.answer_noise);
}

AttributeWorld make_bisection_world(std::size_t bits, std::size_t distractors, double answer_noise) {
    if (bits < 1 || bits > 20) fail(ErrorKind::invalid_input, "bisection world needs 1..20 bits");
    const std::size_t n = std::size_t{1} << bits;
    std::vector<std::string> names;
    std::vector<std::vector<std::uint8_t>> matrix(n, std::vector<std::uint8_t>(bits + distractors, 1));
    for (std::size_t y = 0; y < n; ++y) {
        names.push_back("class " + std::to_string(y));
        for (std::size_t b = 0; b < bits; ++b) matrix[y][b] = (y >> b) & 1U;
    }
    std::vector<Query> queries;
    for (std::size_t b = 0; b < bits; ++b) {
        queries.emplace_back("bit" + std::to_string(b), "Is bit " + std::to_string(b) + " of the class index set?");
    }
    for (std::size_t d = 0; d < distractors; ++d) {
        queries.emplace_back("const" + std::to_string(d), "Is this constant question " + std::to_string(d) + " true?");
    }
    return AttributeWorld(LabelSpace(std::move(names)), std::move(queries), std::move(matrix),
                          Distribution::uniform(n), answer_noise);
}

}  // namespace cip
