#pragma once

#include <vector>

#include "cip/core.hpp"
#include "cip/worlds/attribute_world.hpp"

namespace cip {

std::size_t sample_categorical(const std::vector<double>& weights, SeededRng& rng);

enum class HypothesisMode {
    predictor_posterior,  // labels drawn from f(h)
    exact_posterior,      // labels drawn from the world's Bayes posterior
    uniform_consistent,   // uniform over labels the history has not ruled out
    exhaustive,           // every label and answer, weighted exactly
};

// Hypotheses for worlds whose data space equals the label space.
class PosteriorHypothesisSampler : public HypothesisSampler {
public:
    PosteriorHypothesisSampler(const AttributeWorld& world, const Predictor* predictor,
                               HypothesisMode mode = HypothesisMode::predictor_posterior);

    HypothesisDraw draw(const Query& q, const History& h, const Subject& episode, std::size_t n,
                        SeededRng& rng) const override;
    HypothesisMode mode() const noexcept { return mode_; }

private:
    const AttributeWorld& world_;
    const Predictor* predictor_;
    HypothesisMode mode_;
};

// Hypotheses drawn uniformly, without replacement when possible, from a finite
// pool of datapoints (the estimation split).
class PoolHypothesisSampler : public HypothesisSampler {
public:
    PoolHypothesisSampler(const World& world, std::vector<std::size_t> pool);

    HypothesisDraw draw(const Query& q, const History& h, const Subject& episode, std::size_t n,
                        SeededRng& rng) const override;

private:
    const World& world_;
    std::vector<std::size_t> pool_;
};

// Draws a subject by weight, then k queries i.i.d. uniform over its query set
// (with replacement), answered by the world.
class UniformHistorySampler : public HistorySampler {
public:
    UniformHistorySampler(const World& world, std::vector<std::size_t> population, std::vector<double> weights = {});
    explicit UniformHistorySampler(const AttributeWorld& world);

    SampledHistory sample(std::size_t k, SeededRng& rng) const override;
    std::string kind() const override { return "uniform"; }

private:
    const World& world_;
    std::vector<std::size_t> population_;
    std::vector<double> weights_;
};

// Draws a subject, then asks the proposer for one query at a time.
class DpHistorySampler : public HistorySampler {
public:
    DpHistorySampler(const World& world, const QueryProposer& proposer, std::vector<std::size_t> population,
                     std::vector<double> weights = {});

    SampledHistory sample(std::size_t k, SeededRng& rng) const override;
    std::string kind() const override { return "dp"; }

private:
    const World& world_;
    const QueryProposer& proposer_;
    std::vector<std::size_t> population_;
    std::vector<double> weights_;
};

SampledHistory sample_uniform_history(const AttributeWorld& w, std::size_t k, SeededRng& rng);
SampledHistory sample_dp_history(const QueryProposer& proposer, const World& answer_source, std::size_t k,
                                 SeededRng& rng);

// Replays a fixed script: the step-t proposals are script[t*m .. t*m+m), where
// t is the history length.
class ScriptedProposer : public QueryProposer {
public:
    explicit ScriptedProposer(std::vector<Query> script) : script_(std::move(script)) {}
    std::vector<Query> propose(const History& h, std::size_t m, const Subject& subject) const override;

private:
    std::vector<Query> script_;
};

}  // namespace cip
