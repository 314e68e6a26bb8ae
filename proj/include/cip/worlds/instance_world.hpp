#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "cip/core.hpp"

namespace cip {

inline constexpr const char* kCannotAnswer = "The patient cannot answer this question.";

struct Instance {
    std::string id;
    std::string context;
    std::string question;   // optional, used by the expert prompt
    std::string specialty;  // optional, used by the expert prompt
    LabelSpace options;
    std::size_t answer;     // index into options
    std::vector<Query> queries;
    std::vector<std::string> fact_answers;  // parallel to queries
};

// One query set per datapoint, answered from canned facts. A query put to a
// datapoint that does not own it is answered by the fact with the same
// question text, or by kCannotAnswer.
class InstanceWorld : public World {
public:
    explicit InstanceWorld(std::vector<Instance> instances);

    const std::vector<Instance>& instances() const noexcept { return instances_; }
    const Instance& instance(std::size_t i) const { return instances_.at(i); }

    std::size_t num_subjects() const override { return instances_.size(); }
    std::string subject_id(std::size_t subject) const override { return instances_.at(subject).id; }
    const LabelSpace& labels_for(std::size_t subject) const override { return instances_.at(subject).options; }
    std::size_t true_label(std::size_t subject) const override { return instances_.at(subject).answer; }
    const std::vector<Query>& queries_for(std::size_t subject) const override { return instances_.at(subject).queries; }
    std::vector<AnswerOutcome> answer_outcomes(std::size_t subject, const Query& q) const override;

private:
    std::vector<Instance> instances_;
};

InstanceWorld parse_instance_jsonl(std::istream& in);
InstanceWorld load_instance_world(const std::filesystem::path& path);
std::string to_instance_jsonl(const InstanceWorld& w);

struct SyntheticInstanceSpec {
    std::size_t instances = 90;
    std::size_t options = 4;
    std::size_t min_facts = 5;
    std::size_t max_facts = 9;
    std::uint64_t seed = 11;
};

// Clinical-vignette-shaped world with a shared pool of diagnoses and findings,
// so that answers from one datapoint carry information about another.
InstanceWorld make_synthetic_instance_world(const SyntheticInstanceSpec& spec);

}  // namespace cip
