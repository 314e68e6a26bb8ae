#include "cip/conformal.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "cip/infotheory.hpp"

namespace cip {

namespace {

void check_bound_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) fail(ErrorKind::invalid_input, "alpha must lie in (0, 0.5)");
}

}  // namespace

double conformal_threshold(std::vector<double> scores, double alpha) {
    if (scores.empty()) fail(ErrorKind::invalid_input, "no calibration scores");
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::invalid_input, "alpha must lie in (0, 1)");
    const double n = static_cast<double>(scores.size());
    const auto rank = static_cast<std::size_t>(std::floor(alpha * (n + 1.0) + 1e-9));
    if (rank == 0) return kBelowAll;
    const auto nth = scores.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(scores.begin(), nth, scores.end());
    return *nth;
}

bool PredictionSet::contains(std::size_t label) const {
    return std::binary_search(members.begin(), members.end(), label);
}

PredictionSet prediction_set(const Distribution& d, double threshold, std::size_t length) {
    PredictionSet s;
    s.threshold = threshold;
    s.length = length;
    for (std::size_t y = 0; y < d.size(); ++y) {
        if (d[y] >= threshold) s.members.push_back(y);
    }
    return s;
}

std::size_t prediction_set_size(const Distribution& d, double threshold) {
    std::size_t n = 0;
    for (double p : d.probs()) n += p >= threshold ? 1 : 0;
    return n;
}

double jittered(double score, const JitterSpec& jitter, SeededRng& rng) {
    if (!jitter.enabled) return score;
    return score - jitter.magnitude * rng.uniform();
}

CalibrationTable::CalibrationTable(double alpha, std::size_t n, std::vector<double> thresholds, std::string sampler,
                                   JitterSpec jitter)
    : alpha_(alpha), n_(n), thresholds_(std::move(thresholds)), sampler_(std::move(sampler)), jitter_(jitter) {
    check_bound_alpha(alpha_);
    if (n_ < 1) fail(ErrorKind::invalid_input, "N must be at least 1");
    if (thresholds_.empty()) fail(ErrorKind::invalid_input, "calibration table needs L >= 1");
    for (double t : thresholds_) {
        if (std::isnan(t) || t > 1.0 || (std::isinf(t) && t > 0)) fail(ErrorKind::invalid_input, "threshold out of range");
    }
    if (jitter_.enabled && !(jitter_.magnitude > 0.0)) fail(ErrorKind::invalid_input, "jitter magnitude must be > 0");
}

double CalibrationTable::tau(std::size_t k) const {
    if (k < 1 || k > thresholds_.size()) {
        fail(ErrorKind::length_exceeded, "no threshold for length " + std::to_string(k) + " (L = " +
                                             std::to_string(thresholds_.size()) + ")");
    }
    return thresholds_[k - 1];
}

std::string CalibrationTable::to_json() const {
    nlohmann::ordered_json j;
    j["alpha"] = alpha_;
    j["N"] = n_;
    j["L"] = thresholds_.size();
    j["sampler"] = sampler_;
    j["jitter"] = {{"enabled", jitter_.enabled}, {"magnitude", jitter_.magnitude}};
    auto& t = j["thresholds"] = nlohmann::ordered_json::array();
    for (double v : thresholds_) {
        if (std::isinf(v)) t.push_back(nullptr);
        else t.push_back(v);
    }
    return j.dump(2) + "\n";
}

CalibrationTable CalibrationTable::from_json(const std::string& text) {
    try {
        const auto j = nlohmann::ordered_json::parse(text);
        std::vector<double> thresholds;
        for (const auto& v : j.at("thresholds")) thresholds.push_back(v.is_null() ? kBelowAll : v.get<double>());
        if (j.at("L").get<std::size_t>() != thresholds.size()) fail(ErrorKind::parse, "L does not match thresholds");
        JitterSpec jitter{j.at("jitter").at("enabled").get<bool>(), j.at("jitter").at("magnitude").get<double>()};
        return CalibrationTable(j.at("alpha").get<double>(), j.at("N").get<std::size_t>(), std::move(thresholds),
                                j.at("sampler").get<std::string>(), jitter);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("calibration table: ") + e.what());
    }
}

std::vector<std::vector<double>> calibration_scores(const HistorySampler& sampler, const Predictor& predictor,
                                                    std::size_t max_length, std::size_t n, SeededRng& rng,
                                                    const JitterSpec& jitter, std::size_t workers) {
    if (n < 1 || max_length < 1) fail(ErrorKind::invalid_input, "calibration needs N >= 1 and L >= 1");
    std::vector<std::vector<double>> scores(max_length, std::vector<double>(n));
    // Per-length streams keyed off one draw from the caller's stream, so the
    // scores do not depend on how lengths are scheduled across workers.
    const SeededRng base = rng.fork(rng.next_u64());
    const std::size_t w = predictor.concurrent_safe() ? workers : 1;
    parallel_for(max_length, w, [&](std::size_t li) {
        SeededRng stream = base.fork(li + 1);
        try {
            for (std::size_t i = 0; i < n; ++i) {
                const SampledHistory s = sampler.sample(li + 1, stream);
                const Distribution d = predictor.predict(s.history, s.subject);
                if (s.subject.label >= d.size()) fail(ErrorKind::shape, "true label outside predictor output");
                scores[li][i] = jittered(d[s.subject.label], jitter, stream);
            }
        } catch (const Error& e) {
            throw Error(ErrorKind::calibration,
                        "calibration failed at length " + std::to_string(li + 1) + ": " + e.what());
        }
    });
    return scores;
}

CalibrationTable table_from_scores(const std::vector<std::vector<double>>& scores, double alpha,
                                   const std::string& sampler, const JitterSpec& jitter) {
    check_bound_alpha(alpha);
    if (scores.empty()) fail(ErrorKind::invalid_input, "no calibration lengths");
    std::vector<double> thresholds;
    for (const auto& s : scores) thresholds.push_back(conformal_threshold(s, alpha));
    return CalibrationTable(alpha, scores.front().size(), std::move(thresholds), sampler, jitter);
}

CalibrationTable calibrate_lengths(const HistorySampler& sampler, const Predictor& predictor, double alpha,
                                   std::size_t max_length, std::size_t n, SeededRng& rng, const JitterSpec& jitter,
                                   std::size_t workers) {
    check_bound_alpha(alpha);
    return table_from_scores(calibration_scores(sampler, predictor, max_length, n, rng, jitter, workers), alpha,
                             sampler.kind(), jitter);
}

double log_mean_set_size(const std::vector<std::size_t>& sizes, std::size_t num_labels, EmptySetPolicy policy) {
    if (sizes.empty()) fail(ErrorKind::invalid_input, "no set sizes");
    double mean = 0.0;
    for (std::size_t s : sizes) {
        mean += static_cast<double>(s == 0 && policy == EmptySetPolicy::count_as_full ? num_labels : s);
    }
    mean /= static_cast<double>(sizes.size());
    return std::log(std::max(mean, 1e-9));
}

SetSizeEstimate expected_log_set_size(const Predictor& predictor, const HypothesisSampler& sampler, const Query& q,
                                      const History& h, double tau_next, std::size_t n_est, SeededRng& rng,
                                      const Subject& episode, EmptySetPolicy policy) {
    const auto avg = average_over_hypotheses(
        predictor, sampler, q, h, episode, n_est, rng, [&](const Distribution& d) {
            const std::size_t size = prediction_set_size(d, tau_next);
            return static_cast<double>(size == 0 && policy == EmptySetPolicy::count_as_full ? d.size() : size);
        });
    SetSizeEstimate out;
    out.mean_size = avg.mean;
    out.value = std::log(std::max(avg.mean, 1e-9));
    out.std_error = avg.mean > 0.0 ? avg.std_error / avg.mean : 0.0;
    out.n_samples = avg.n_samples;
    out.replacement_fallback = avg.replacement_fallback;
    return out;
}

BoundConstants bound_constants(double alpha, std::size_t n, std::size_t num_labels) {
    check_bound_alpha(alpha);
    if (n < 1 || num_labels < 2) fail(ErrorKind::invalid_input, "bound constants need N >= 1 and |Y| >= 2");
    const double alpha_n = alpha - 1.0 / (static_cast<double>(n) + 1.0);
    const double lambda = binary_entropy(alpha) + alpha * std::log(static_cast<double>(num_labels)) -
                          (1.0 - alpha_n) * std::log1p(-alpha);
    return {alpha, alpha_n, lambda};
}

double entropy_bound(const BoundConstants& c, double expected_size) {
    if (!(expected_size > 0.0)) fail(ErrorKind::invalid_input, "expected set size must be positive");
    return c.lambda_alpha + (1.0 - c.alpha_n) * std::log(expected_size);
}

std::vector<std::optional<double>> coverage_from_traces(const std::vector<CoverageTrace>& traces,
                                                        const CalibrationTable& table, SeededRng* rng) {
    const std::size_t L = table.max_length();
    std::vector<double> hits(L, 0.0);
    std::vector<double> counts(L, 0.0);
    auto covered = [&](const Distribution& d, std::size_t label, std::size_t k) {
        double score = d[label];
        if (rng != nullptr) score = jittered(score, table.jitter(), *rng);
        return score >= table.tau(k);
    };
    for (const auto& t : traces) {
        const std::size_t n = t.posteriors.size();
        if (n > L) fail(ErrorKind::length_exceeded, "trace longer than the calibration table");
        for (std::size_t k = 1; k <= n; ++k) {
            counts[k - 1] += 1.0;
            hits[k - 1] += covered(t.posteriors[k - 1], t.true_label, k) ? 1.0 : 0.0;
        }
        if (t.stopped && n < L && (n >= 1 || t.initial)) {
            const double final_hit =
                (n >= 1 ? covered(t.posteriors[n - 1], t.true_label, n) : covered(*t.initial, t.true_label, 1)) ? 1.0
                                                                                                                : 0.0;
            for (std::size_t k = n + 1; k <= L; ++k) {
                counts[k - 1] += 1.0;
                hits[k - 1] += final_hit;
            }
        }
    }
    std::vector<std::optional<double>> out(L);
    for (std::size_t k = 0; k < L; ++k) {
        if (counts[k] > 0.0) out[k] = hits[k] / counts[k];
    }
    return out;
}

std::vector<std::optional<double>> empirical_coverage(const std::vector<CoverageRecord>& records,
                                                      const CalibrationTable& table, const Predictor& predictor,
                                                      SeededRng* rng) {
    std::vector<CoverageTrace> traces;
    traces.reserve(records.size());
    for (const auto& r : records) {
        if (r.history.size() > table.max_length()) fail(ErrorKind::length_exceeded, "record longer than L");
        CoverageTrace t;
        t.true_label = r.subject.label;
        t.stopped = r.stopped;
        for (std::size_t k = 1; k <= r.history.size(); ++k) {
            t.posteriors.push_back(predictor.predict(r.history.prefix(k), r.subject));
        }
        traces.push_back(std::move(t));
    }
    return coverage_from_traces(traces, table, rng);
}

}  // namespace cip
