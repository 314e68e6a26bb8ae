#pragma once

// Interfaces shared by worlds, estimators, the episode runner and the LLM
// bridge. Implementations live in the module that owns the backing model.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cip/core/distribution.hpp"
#include "cip/core/rng.hpp"
#include "cip/core/types.hpp"

namespace cip {

// What a prediction is about. `instance` selects the public context (for
// instance worlds, the patient record framing the prompt); `label` is the
// hypothesised or true label, visible only to oracle test doubles.
struct Subject {
    std::size_t instance = 0;
    std::size_t label = 0;
};

struct AnswerOutcome {
    Answer answer;
    double probability;
};

class World {
public:
    virtual ~World() = default;

    virtual std::size_t num_subjects() const = 0;
    virtual std::string subject_id(std::size_t subject) const = 0;
    virtual const LabelSpace& labels_for(std::size_t subject) const = 0;
    virtual std::size_t true_label(std::size_t subject) const = 0;
    virtual const std::vector<Query>& queries_for(std::size_t subject) const = 0;

    // Full answer distribution for `q` put to `subject`; probabilities sum to 1.
    virtual std::vector<AnswerOutcome> answer_outcomes(std::size_t subject, const Query& q) const = 0;

    // Draws one answer from answer_outcomes.
    virtual Answer answer(std::size_t subject, const Query& q, SeededRng& rng) const;
};

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual Distribution predict(const History& h, const Subject& subject) const = 0;
    // Implementations that cannot be called from several threads at once
    // return false; callers then serialise.
    virtual bool concurrent_safe() const { return true; }
};

// One hypothesised answer to a candidate query, with the label of the
// hypothesis that produced it and its weight in the average.
struct HypothesisOutcome {
    Answer answer;
    std::size_t label;
    double weight;
};

struct HypothesisDraw {
    std::vector<HypothesisOutcome> outcomes;
    bool exact = false;                 // exhaustive enumeration, weights sum to 1
    bool replacement_fallback = false;  // finite pool smaller than n
    std::size_t n_hypotheses = 0;
};

class HypothesisSampler {
public:
    virtual ~HypothesisSampler() = default;
    virtual HypothesisDraw draw(const Query& q, const History& h, const Subject& episode, std::size_t n,
                                SeededRng& rng) const = 0;
};

struct SampledHistory {
    History history;
    Subject subject;
};

class HistorySampler {
public:
    virtual ~HistorySampler() = default;
    virtual SampledHistory sample(std::size_t k, SeededRng& rng) const = 0;
    virtual std::string kind() const = 0;
};

class QueryProposer {
public:
    virtual ~QueryProposer() = default;
    virtual std::vector<Query> propose(const History& h, std::size_t m, const Subject& subject) const = 0;
};

// Supplies the real answers during an episode. std::nullopt ends the episode
// (a human quitting, for instance).
class Answerer {
public:
    virtual ~Answerer() = default;
    virtual std::optional<Answer> answer(const Query& q, SeededRng& rng) = 0;
};

class WorldAnswerer : public Answerer {
public:
    WorldAnswerer(const World& world, std::size_t subject) : world_(world), subject_(subject) {}
    std::optional<Answer> answer(const Query& q, SeededRng& rng) override {
        return world_.answer(subject_, q, rng);
    }

private:
    const World& world_;
    std::size_t subject_;
};

}  // namespace cip
