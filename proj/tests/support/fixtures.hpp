#pragma once

// Small worlds and independent reference computations shared by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cip/core.hpp"
#include "cip/worlds.hpp"

namespace fixtures {

using cip::AttributeWorld;
using cip::Distribution;
using cip::LabelSpace;
using cip::Query;

inline LabelSpace letters(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
    return LabelSpace(names);
}

inline AttributeWorld make_world(const std::vector<std::vector<std::uint8_t>>& rows, double noise = 0.0,
                                 std::vector<double> prior = {}) {
    const std::size_t n = rows.size();
    std::vector<Query> qs;
    for (std::size_t j = 0; j < rows.front().size(); ++j) {
        qs.emplace_back("q" + std::to_string(j + 1), "Question " + std::to_string(j + 1) + "?");
    }
    Distribution p = prior.empty() ? Distribution::uniform(n) : Distribution(prior);
    return AttributeWorld(letters(n), qs, rows, p, noise);
}

// Four equiprobable classes; q1 splits 2/2, q2 splits 1/3, q3 is constant.
inline AttributeWorld four_class_world() {
    return make_world({{1, 1, 1}, {1, 0, 1}, {0, 0, 1}, {0, 0, 1}});
}

inline AttributeWorld random_world(cip::SeededRng& rng, std::size_t classes, std::size_t queries, double noise = 0.0) {
    std::vector<std::vector<std::uint8_t>> rows(classes, std::vector<std::uint8_t>(queries));
    for (auto& r : rows)
        for (auto& c : r) c = rng.bernoulli(0.5) ? 1 : 0;
    return make_world(rows, noise);
}

// Reference Bayes posterior written from scratch: prior times per-answer
// likelihoods, normalised, no floor.
inline std::vector<double> ref_posterior(const AttributeWorld& w, const std::vector<std::pair<std::size_t, bool>>& h) {
    std::vector<double> p(w.num_classes());
    double z = 0.0;
    for (std::size_t y = 0; y < p.size(); ++y) {
        double v = w.prior()[y];
        for (auto [j, yes] : h) {
            const bool match = w.attribute(y, j) == yes;
            v *= match ? 1.0 - w.answer_noise() : w.answer_noise();
        }
        p[y] = v;
        z += v;
    }
    for (auto& v : p) v /= z;
    return p;
}

inline double ref_entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0) h -= v * std::log(v);
    return h;
}

// H(Y | answer to j, h) by enumerating both answers under the reference model.
inline double ref_conditional_entropy(const AttributeWorld& w, std::size_t j,
                                      const std::vector<std::pair<std::size_t, bool>>& h) {
    const auto post = ref_posterior(w, h);
    double out = 0.0;
    for (bool yes : {true, false}) {
        double pa = 0.0;
        for (std::size_t y = 0; y < post.size(); ++y) {
            const bool match = w.attribute(y, j) == yes;
            pa += post[y] * (match ? 1.0 - w.answer_noise() : w.answer_noise());
        }
        if (pa <= 0.0) continue;
        auto h2 = h;
        h2.emplace_back(j, yes);
        out += pa * ref_entropy(ref_posterior(w, h2));
    }
    return out;
}

inline cip::History to_history(const AttributeWorld& w, const std::vector<std::pair<std::size_t, bool>>& h) {
    cip::History out;
    for (auto [j, yes] : h) out = out.extend(w.queries()[j], cip::Answer::binary(yes));
    return out;
}

// Every history a noiseless world can produce, up to query order: one entry per
// (query subset, answer pattern realised by some class). Queries appear in
// world order.
inline std::vector<std::vector<std::pair<std::size_t, bool>>> reachable_histories(const AttributeWorld& w) {
    const std::size_t nq = w.num_queries();
    std::vector<std::vector<std::pair<std::size_t, bool>>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << nq); ++mask) {
        std::vector<std::vector<std::pair<std::size_t, bool>>> seen;
        for (std::size_t y = 0; y < w.num_classes(); ++y) {
            std::vector<std::pair<std::size_t, bool>> h;
            for (std::size_t j = 0; j < nq; ++j)
                if (mask >> j & 1) h.emplace_back(j, w.attribute(y, j));
            bool dup = false;
            for (const auto& s : seen) dup = dup || s == h;
            if (!dup) seen.push_back(h);
        }
        out.insert(out.end(), seen.begin(), seen.end());
    }
    return out;
}

// Lowest index within tol of the minimum.
inline std::size_t ref_argmin(const std::vector<double>& v, double tol = 1e-9) {
    double lo = v.front();
    for (double x : v) lo = std::min(lo, x);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] <= lo + tol) return i;
    return 0;
}

}  // namespace fixtures
