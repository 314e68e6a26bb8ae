#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cip/core.hpp"

namespace cip {

// Threshold below every score: the prediction set is the whole label space.
inline constexpr double kBelowAll = -std::numeric_limits<double>::infinity();

// The floor(alpha (N+1))-th smallest score, or kBelowAll when that rank is 0.
double conformal_threshold(std::vector<double> scores, double alpha);

struct PredictionSet {
    std::vector<std::size_t> members;
    double threshold = kBelowAll;
    std::size_t length = 0;

    std::size_t size() const noexcept { return members.size(); }
    bool contains(std::size_t label) const;
};

PredictionSet prediction_set(const Distribution& d, double threshold, std::size_t length = 0);
std::size_t prediction_set_size(const Distribution& d, double threshold);

struct JitterSpec {
    bool enabled = false;
    double magnitude = 1e-9;
};

// Subtracts U[0, magnitude) from a score when jitter is on.
double jittered(double score, const JitterSpec& jitter, SeededRng& rng);

class CalibrationTable {
public:
    CalibrationTable(double alpha, std::size_t n, std::vector<double> thresholds, std::string sampler,
                     JitterSpec jitter);

    double alpha() const noexcept { return alpha_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t max_length() const noexcept { return thresholds_.size(); }
    const std::string& sampler() const noexcept { return sampler_; }
    const JitterSpec& jitter() const noexcept { return jitter_; }
    const std::vector<double>& thresholds() const noexcept { return thresholds_; }
    // Threshold for histories of length k, 1 <= k <= L.
    double tau(std::size_t k) const;

    std::string to_json() const;
    static CalibrationTable from_json(const std::string& text);

private:
    double alpha_;
    std::size_t n_;
    std::vector<double> thresholds_;
    std::string sampler_;
    JitterSpec jitter_;
};

// Per-length true-label scores, scores[k-1] holding the N scores for length k.
std::vector<std::vector<double>> calibration_scores(const HistorySampler& sampler, const Predictor& predictor,
                                                    std::size_t max_length, std::size_t n, SeededRng& rng,
                                                    const JitterSpec& jitter = {}, std::size_t workers = 1);

CalibrationTable table_from_scores(const std::vector<std::vector<double>>& scores, double alpha,
                                   const std::string& sampler, const JitterSpec& jitter);

CalibrationTable calibrate_lengths(const HistorySampler& sampler, const Predictor& predictor, double alpha,
                                   std::size_t max_length, std::size_t n, SeededRng& rng,
                                   const JitterSpec& jitter = {}, std::size_t workers = 1);

enum class EmptySetPolicy {
    count_as_full,  // an empty set is as uninformative as the full label space
    clamp,          // literal: ln(max(mean size, 1e-9))
};

struct SetSizeEstimate {
    double value = 0.0;  // log of the mean set size
    double mean_size = 0.0;
    double std_error = 0.0;  // delta-method error of the log
    std::size_t n_samples = 0;
    bool replacement_fallback = false;
};

SetSizeEstimate expected_log_set_size(const Predictor& predictor, const HypothesisSampler& sampler, const Query& q,
                                      const History& h, double tau_next, std::size_t n_est, SeededRng& rng,
                                      const Subject& episode = {},
                                      EmptySetPolicy policy = EmptySetPolicy::count_as_full);

// ln(max(mean, 1e-9)) of observed set sizes, after applying the policy.
double log_mean_set_size(const std::vector<std::size_t>& sizes, std::size_t num_labels, EmptySetPolicy policy);

struct BoundConstants {
    double alpha;
    double alpha_n;
    double lambda_alpha;
};

BoundConstants bound_constants(double alpha, std::size_t n, std::size_t num_labels);
double entropy_bound(const BoundConstants& c, double expected_size);

// A scored trajectory for coverage evaluation: posterior after each answered
// query (posteriors[k-1] is f(H_k)) and whether the episode stopped there.
struct CoverageTrace {
    std::vector<Distribution> posteriors;
    std::size_t true_label = 0;
    bool stopped = false;
    // f(H_0); scored at tau(1) when the trace stopped before any answer.
    std::optional<Distribution> initial;
};

struct CoverageRecord {
    History history;
    Subject subject;
    bool stopped = false;
};

// Per-length coverage; std::nullopt where no record contributes. When the
// table is jittered and `rng` is given, test scores are jittered the same way.
std::vector<std::optional<double>> coverage_from_traces(const std::vector<CoverageTrace>& traces,
                                                        const CalibrationTable& table, SeededRng* rng = nullptr);

std::vector<std::optional<double>> empirical_coverage(const std::vector<CoverageRecord>& records,
                                                      const CalibrationTable& table, const Predictor& predictor,
                                                      SeededRng* rng = nullptr);

}  // namespace cip
