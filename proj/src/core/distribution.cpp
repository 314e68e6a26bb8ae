#include "cip/core/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cip/core/error.hpp"

namespace cip {

Distribution::Distribution(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.size() < 2) fail(ErrorKind::shape, "distribution needs at least 2 entries");
    double sum = 0.0;
    for (double v : p_) {
        if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::invalid_input, "distribution entry must be finite and >= 0");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        fail(ErrorKind::invalid_input, "distribution sums to " + std::to_string(sum));
    }
}

Distribution Distribution::floored(std::vector<double> w) {
    if (w.size() < 2) fail(ErrorKind::shape, "distribution needs at least 2 entries");
    double sum = 0.0;
    for (double v : w) {
        if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::invalid_input, "weight must be finite and >= 0");
        sum += v;
    }
    if (!(sum > 0.0)) fail(ErrorKind::empty_support, "all weights are zero");
    bool clamped = false;
    for (double& v : w) {
        v /= sum;
        if (v < kProbabilityFloor) {
            v = kProbabilityFloor;
            clamped = true;
        }
    }
    if (clamped) {
        const double s = std::accumulate(w.begin(), w.end(), 0.0);
        for (double& v : w) v /= s;
    }
    return Distribution(std::move(w), Trusted{});
}

Distribution Distribution::uniform(std::size_t n) {
    if (n < 2) fail(ErrorKind::shape, "distribution needs at least 2 entries");
    return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)), Trusted{});
}

Distribution Distribution::point_mass(std::size_t n, std::size_t at) {
    if (n < 2 || at >= n) fail(ErrorKind::shape, "bad point mass");
    std::vector<double> p(n, 0.0);
    p[at] = 1.0;
    return Distribution(std::move(p), Trusted{});
}

std::size_t Distribution::argmax() const {
    return static_cast<std::size_t>(std::max_element(p_.begin(), p_.end()) - p_.begin());
}

bool Distribution::unique_argmax_is(std::size_t label, double tol) const {
    if (label >= p_.size()) return false;
    for (std::size_t i = 0; i < p_.size(); ++i) {
        if (i != label && p_[i] >= p_[label] - tol) return false;
    }
    return true;
}

Distribution softmax(std::span<const double> logits) {
    if (logits.size() < 2) fail(ErrorKind::shape, "softmax needs at least 2 logits");
    double hi = -INFINITY;
    for (double v : logits) {
        if (!std::isfinite(v)) fail(ErrorKind::invalid_input, "non-finite logit");
        hi = std::max(hi, v);
    }
    std::vector<double> w(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) w[i] = std::exp(logits[i] - hi);
    return Distribution::floored(std::move(w));
}

Distribution softmax(std::span<const double> logits, std::size_t expected_size) {
    if (logits.size() != expected_size) {
        fail(ErrorKind::shape, "expected " + std::to_string(expected_size) + " logits, got " +
                                   std::to_string(logits.size()));
    }
    return softmax(logits);
}

}  // namespace cip
