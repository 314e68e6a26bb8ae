#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cip {

inline constexpr double kProbabilityFloor = 1e-12;

class Distribution {
public:
    // Validates: entries finite and >= 0, sum within 1e-9 of 1, at least 2 entries.
    explicit Distribution(std::vector<double> probs);

    // Normalises nonnegative weights, then clamps entries below the floor and
    // renormalises. Every producer of posteriors goes through this.
    static Distribution floored(std::vector<double> weights);
    static Distribution uniform(std::size_t n);
    static Distribution point_mass(std::size_t n, std::size_t at);

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const std::vector<double>& probs() const noexcept { return p_; }

    // Lowest index among the maximal entries.
    std::size_t argmax() const;
    // True when `label` beats every other entry by more than `tol`.
    bool unique_argmax_is(std::size_t label, double tol = 1e-12) const;

    bool operator==(const Distribution& other) const { return p_ == other.p_; }

private:
    struct Trusted {};
    Distribution(std::vector<double> probs, Trusted) : p_(std::move(probs)) {}

    std::vector<double> p_;
};

Distribution softmax(std::span<const double> logits);
Distribution softmax(std::span<const double> logits, std::size_t expected_size);

}  // namespace cip
