#pragma once

#include <functional>

#include "cip/core.hpp"
#include "cip/worlds/attribute_world.hpp"

namespace cip {

struct EntropyEstimate {
    double value = 0.0;          // nats
    std::size_t n_samples = 0;   // 0 means exact
    double std_error = 0.0;
    bool replacement_fallback = false;
};

double entropy(const Distribution& d);
double binary_entropy(double p);
double mutual_information_gain(double h_before, double h_after);

EntropyEstimate conditional_entropy_exact(const AttributeWorld& world, const Query& q, const History& h);

// Weighted average of `statistic(f(h + (q, a)))` over the sampler's outcomes.
// For sampled draws the standard error is the sample std over the n_est
// hypotheses divided by sqrt(n_est); exact draws report 0.
struct HypothesisAverage {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    bool replacement_fallback = false;
};

HypothesisAverage average_over_hypotheses(const Predictor& predictor, const HypothesisSampler& sampler,
                                          const Query& q, const History& h, const Subject& episode,
                                          std::size_t n_est, SeededRng& rng,
                                          const std::function<double(const Distribution&)>& statistic);

EntropyEstimate conditional_entropy_mc(const Predictor& predictor, const HypothesisSampler& sampler,
                                       const Query& q, const History& h, std::size_t n_est, SeededRng& rng,
                                       const Subject& episode = {});

}  // namespace cip
