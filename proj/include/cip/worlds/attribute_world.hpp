#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cip/core.hpp"

namespace cip {

// Closed world where every class has a fixed yes/no answer to every query.
// Subjects are the classes themselves.
class AttributeWorld : public World {
public:
    AttributeWorld(LabelSpace labels, std::vector<Query> queries, std::vector<std::vector<std::uint8_t>> matrix,
                   Distribution prior, double answer_noise = 0.0);

    const LabelSpace& labels() const noexcept { return labels_; }
    const std::vector<Query>& queries() const noexcept { return queries_; }
    const Distribution& prior() const noexcept { return prior_; }
    double answer_noise() const noexcept { return noise_; }
    std::size_t num_classes() const noexcept { return labels_.size(); }
    std::size_t num_queries() const noexcept { return queries_.size(); }

    bool attribute(std::size_t label, std::size_t query_index) const { return matrix_[label][query_index] != 0; }
    // Resolves by id first, then by exact question text.
    std::optional<std::size_t> query_index(const Query& q) const;
    std::size_t require_query_index(const Query& q) const;

    AttributeWorld with_noise(double answer_noise) const;

    std::size_t num_subjects() const override { return labels_.size(); }
    std::string subject_id(std::size_t subject) const override { return labels_.name(subject); }
    const LabelSpace& labels_for(std::size_t) const override { return labels_; }
    std::size_t true_label(std::size_t subject) const override { return subject; }
    const std::vector<Query>& queries_for(std::size_t) const override { return queries_; }
    std::vector<AnswerOutcome> answer_outcomes(std::size_t subject, const Query& q) const override;

private:
    LabelSpace labels_;
    std::vector<Query> queries_;
    std::vector<std::vector<std::uint8_t>> matrix_;
    Distribution prior_;
    double noise_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::size_t> by_text_;
};

// Unnormalised Bayes weights prior(y) * likelihood(h | y), without the floor.
std::vector<double> posterior_weights(const AttributeWorld& w, const History& h);
Distribution exact_posterior(const AttributeWorld& w, const History& h);

Answer answer_query(const AttributeWorld& w, std::size_t label, const Query& q, SeededRng& rng);

AttributeWorld parse_attribute_csv(std::istream& in, double answer_noise = 0.0);
AttributeWorld load_attribute_world(const std::filesystem::path& path, double answer_noise = 0.0);
std::string to_attribute_csv(const AttributeWorld& w);

const std::vector<std::string>& animal_class_names();

struct SyntheticAttributeSpec {
    std::size_t classes = 20;
    std::size_t queries = 85;
    double min_prevalence = 0.15;
    double max_prevalence = 0.85;
    double answer_noise = 0.0;
    std::uint64_t seed = 7;
};

// Random binary matrix whose class rows are pairwise distinct. Uses the animal
// names as labels when there are at most 20 classes.
AttributeWorld make_synthetic_attribute_world(const SyntheticAttributeSpec& spec);

// 2^bits classes; query j asks for bit j of the class index. `distractors`
// constant-yes queries are appended after the bisecting ones.
AttributeWorld make_bisection_world(std::size_t bits, std::size_t distractors = 0, double answer_noise = 0.0);

}  // namespace cip
