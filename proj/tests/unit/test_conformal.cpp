#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cip/conformal.hpp"
#include "cip/worlds.hpp"
#include "fixtures.hpp"

using namespace cip;

namespace {

// Bound constants evaluated independently in extended precision.
long double ref_lambda(long double alpha, long double n, long double labels) {
    const long double alpha_n = alpha - 1.0L / (n + 1.0L);
    const long double hb = -alpha * std::log(alpha) - (1.0L - alpha) * std::log(1.0L - alpha);
    return hb + alpha * std::log(labels) - (1.0L - alpha_n) * std::log(1.0L - alpha);
}

std::vector<double> percent_scores() {
    std::vector<double> s;
    for (int i = 1; i <= 100; ++i) s.push_back(i / 100.0);
    return s;
}

}  // namespace

TEST_CASE("conformal_threshold order statistics") {
    auto scores = percent_scores();
    // Shuffle to make sure order does not matter.
    SeededRng rng(1, 0);
    for (std::size_t i = scores.size() - 1; i > 0; --i) std::swap(scores[i], scores[rng.index(i + 1)]);
    const double tau = conformal_threshold(scores, 0.1);
    CHECK(tau == doctest::Approx(0.10).epsilon(1e-12));
    std::size_t kept = 0;
    for (double s : scores) kept += s >= tau;
    CHECK(kept == 91);  // the 10th smallest and everything above it
    CHECK(conformal_threshold({0.2, 0.4, 0.6, 0.8}, 0.5) == doctest::Approx(0.4));
    CHECK(conformal_threshold({0.3, 0.5, 0.9}, 0.1) == kBelowAll);
}

TEST_CASE("conformal_threshold errors") {
    CHECK_THROWS_AS(conformal_threshold({}, 0.1), Error);
    CHECK_THROWS_AS(conformal_threshold({0.5}, 0.0), Error);
    CHECK_THROWS_AS(conformal_threshold({0.5}, 1.0), Error);
}

TEST_CASE("threshold rank survives decimal alphas") {
    // 0.29 * 100 is 28.999999999999996 in binary floating point.
    std::vector<double> s;
    for (int i = 1; i <= 99; ++i) s.push_back(i / 100.0);
    CHECK(conformal_threshold(s, 0.29) == doctest::Approx(0.29));
}

TEST_CASE("prediction_set membership") {
    const Distribution d({0.5, 0.3, 0.2});
    const PredictionSet s = prediction_set(d, 0.25);
    CHECK(s.members == std::vector<std::size_t>{0, 1});
    CHECK(s.size() == 2);
    CHECK(prediction_set(d, kBelowAll).size() == 3);
    const PredictionSet pm = prediction_set(Distribution::point_mass(4, 2), 1.0);
    CHECK(pm.members == std::vector<std::size_t>{2});
}

TEST_CASE("prediction sets shrink as the threshold rises") {
    SeededRng rng(2, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.index(15);
        std::vector<double> z(n);
        for (auto& v : z) v = 4.0 * rng.uniform();
        const Distribution d = softmax(z);
        double t1 = rng.uniform() * 0.6, t2 = rng.uniform() * 0.6;
        if (t1 > t2) std::swap(t1, t2);
        const auto big = prediction_set(d, t1).members;
        for (std::size_t y : prediction_set(d, t2).members) {
            CHECK(std::find(big.begin(), big.end(), y) != big.end());
        }
    }
}

TEST_CASE("calibrate_lengths degenerate predictors") {
    const AttributeWorld w = make_synthetic_attribute_world(SyntheticAttributeSpec{});
    UniformHistorySampler sampler(w);
    SUBCASE("point mass on the truth") {
        TruthPointMassPredictor pred(20);
        SeededRng rng(3, 0);
        const CalibrationTable t = calibrate_lengths(sampler, pred, 0.1, 5, 100, rng);
        for (std::size_t k = 1; k <= 5; ++k) CHECK(t.tau(k) == 1.0);
        const PredictionSet s = prediction_set(Distribution::point_mass(20, 7), t.tau(3));
        CHECK(s.members == std::vector<std::size_t>{7});
    }
    SUBCASE("uniform predictor") {
        ConstantPredictor pred(Distribution::uniform(20));
        SeededRng rng(3, 0);
        const CalibrationTable t = calibrate_lengths(sampler, pred, 0.1, 4, 100, rng);
        for (std::size_t k = 1; k <= 4; ++k) {
            CHECK(t.tau(k) == doctest::Approx(1.0 / 20.0).epsilon(1e-12));
            CHECK(prediction_set(Distribution::uniform(20), t.tau(k)).size() == 20);
        }
    }
    SUBCASE("L = 1, N = 1, alpha = 0.4 gives the sentinel") {
        ExactPosteriorPredictor pred(w);
        SeededRng rng(3, 0);
        const CalibrationTable t = calibrate_lengths(sampler, pred, 0.4, 1, 1, rng);
        CHECK(t.max_length() == 1);
        CHECK(t.tau(1) == kBelowAll);
    }
}

TEST_CASE("calibration table contract") {
    CHECK_THROWS_AS(CalibrationTable(0.5, 10, {0.1}, "uniform", {}), Error);
    CHECK_THROWS_AS(CalibrationTable(0.1, 10, {}, "uniform", {}), Error);
    const CalibrationTable t(0.1, 10, {0.1, kBelowAll, 0.3}, "uniform", JitterSpec{true, 1e-9});
    CHECK_THROWS_AS(t.tau(0), Error);
    CHECK_THROWS_AS(t.tau(4), Error);
    try {
        t.tau(4);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::length_exceeded);
    }
    const std::string json = t.to_json();
    CHECK(json.find("null") != std::string::npos);
    const CalibrationTable back = CalibrationTable::from_json(json);
    CHECK(back.to_json() == json);
    CHECK(back.tau(2) == kBelowAll);
    CHECK(back.jitter().enabled);
}

TEST_CASE("calibration is deterministic across runs and worker counts") {
    const AttributeWorld w = make_synthetic_attribute_world(SyntheticAttributeSpec{});
    UniformHistorySampler sampler(w);
    const ExactPosteriorPredictor base(w);
    const MiscalibratedPredictor pred(base, MiscalibrationSpec{3.0, {}});
    std::string first;
    for (std::size_t workers : {1, 1, 3}) {
        SeededRng rng(17, 4);
        const auto t = calibrate_lengths(sampler, pred, 0.1, 8, 100, rng, JitterSpec{true, 1e-9}, workers);
        if (first.empty()) first = t.to_json();
        CHECK(t.to_json() == first);
    }
}

TEST_CASE("jitter subtracts and stays below the score") {
    SeededRng rng(4, 0);
    const JitterSpec on{true, 1e-9};
    for (int i = 0; i < 100; ++i) {
        const double s = jittered(0.5, on, rng);
        CHECK(s <= 0.5);
        CHECK(s > 0.5 - 1e-9 - 1e-15);
    }
    CHECK(jittered(0.5, JitterSpec{}, rng) == 0.5);
}

TEST_CASE("log mean set size examples") {
    CHECK(log_mean_set_size({1, 2, 2, 3}, 5, EmptySetPolicy::clamp) == doctest::Approx(std::log(2.0)));
    CHECK(log_mean_set_size({1, 2, 2, 3}, 5, EmptySetPolicy::count_as_full) == doctest::Approx(std::log(2.0)));
    CHECK(log_mean_set_size({1, 1, 1}, 5, EmptySetPolicy::clamp) == 0.0);
    CHECK(log_mean_set_size({0, 0}, 5, EmptySetPolicy::clamp) == doctest::Approx(std::log(1e-9)).epsilon(1e-12));
    CHECK(std::abs(std::log(1e-9) + 20.72) < 0.01);
    CHECK(log_mean_set_size({0, 0}, 5, EmptySetPolicy::count_as_full) == doctest::Approx(std::log(5.0)));
    CHECK(log_mean_set_size({0, 3}, 5, EmptySetPolicy::count_as_full) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("expected_log_set_size on the four-class world") {
    const AttributeWorld w = fixtures::four_class_world();
    ExactPosteriorPredictor pred(w);
    PosteriorHypothesisSampler sampler(w, &pred, HypothesisMode::exhaustive);
    SeededRng rng(5, 0);
    const auto a = expected_log_set_size(pred, sampler, w.queries()[0], History{}, 0.3, 4, rng);
    const auto b = expected_log_set_size(pred, sampler, w.queries()[1], History{}, 0.3, 4, rng);
    CHECK(a.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(b.value == doctest::Approx(std::log(2.5)).epsilon(1e-12));
    CHECK(b.mean_size == doctest::Approx(2.5));
}

TEST_CASE("entropy bound constants") {
    const BoundConstants c = bound_constants(0.1, 100, 20);
    CHECK(c.alpha_n == doctest::Approx(0.1 - 1.0 / 101.0).epsilon(1e-15));
    CHECK(c.alpha_n == doctest::Approx(0.09010).epsilon(1e-4));
    CHECK(std::abs(c.lambda_alpha - 0.72052) < 1e-4);
    CHECK(c.lambda_alpha == doctest::Approx(double(ref_lambda(0.1L, 100.0L, 20.0L))).epsilon(1e-13));
    CHECK(entropy_bound(c, 1.0) == doctest::Approx(c.lambda_alpha));
    CHECK(entropy_bound(c, 20.0) == doctest::Approx(3.4463).epsilon(1e-4));
    CHECK_THROWS_AS(entropy_bound(c, 0.0), Error);
    const BoundConstants tiny = bound_constants(1e-9, 100, 20);
    CHECK(entropy_bound(tiny, 1.0) < 1e-6);
}

TEST_CASE("entropy_bound is increasing in the set size and continuous in alpha") {
    SeededRng rng(6, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double alpha = 0.01 + 0.48 * rng.uniform();
        const auto c = bound_constants(alpha, 100, 2 + rng.index(30));
        const double s1 = 0.1 + 10 * rng.uniform(), s2 = s1 + 0.01 + rng.uniform();
        CHECK(entropy_bound(c, s1) < entropy_bound(c, s2));
        const auto c2 = bound_constants(alpha + 1e-7, 100, 2 + 0);
        const auto c1 = bound_constants(alpha, 100, 2);
        CHECK(std::abs(c2.lambda_alpha - c1.lambda_alpha) < 1e-5);
    }
}

TEST_CASE("coverage counting") {
    const CalibrationTable t(0.1, 100, {0.5}, "uniform", {});
    std::vector<CoverageTrace> traces;
    for (int i = 0; i < 10; ++i) {
        CoverageTrace tr;
        tr.true_label = 0;
        tr.posteriors.push_back(i < 9 ? Distribution({0.7, 0.3}) : Distribution({0.2, 0.8}));
        traces.push_back(tr);
    }
    const auto cov = coverage_from_traces(traces, t);
    REQUIRE(cov[0].has_value());
    CHECK(*cov[0] == doctest::Approx(0.9));
}

TEST_CASE("coverage: absent lengths and frozen stopped records") {
    const CalibrationTable t(0.1, 100, {0.5, 0.5, 0.5}, "uniform", {});
    CoverageTrace stopped;
    stopped.true_label = 1;
    stopped.stopped = true;
    stopped.posteriors = {Distribution({0.3, 0.7})};
    CoverageTrace running;
    running.true_label = 0;
    running.posteriors = {Distribution({0.3, 0.7}), Distribution({0.6, 0.4})};
    const auto cov = coverage_from_traces({stopped, running}, t);
    CHECK(*cov[0] == doctest::Approx(0.5));
    CHECK(*cov[1] == doctest::Approx(1.0));
    CHECK(*cov[2] == doctest::Approx(1.0));  // only the stopped record, frozen
    const auto none = coverage_from_traces({running}, t);
    CHECK_FALSE(none[2].has_value());
}

TEST_CASE("coverage: a record stopped before any answer keeps its initial set") {
    const CalibrationTable t(0.1, 100, {0.5, 0.9, 0.9}, "uniform", {});
    CoverageTrace early;
    early.true_label = 0;
    early.stopped = true;
    CHECK_FALSE(coverage_from_traces({early}, t)[0].has_value());
    early.initial = Distribution({0.6, 0.4});
    const auto cov = coverage_from_traces({early}, t);
    for (const auto& c : cov) CHECK(*c == 1.0);  // scored once, at tau(1) = 0.5
}

TEST_CASE("point-mass predictor with its own calibration covers everything") {
    const AttributeWorld w = make_synthetic_attribute_world(SyntheticAttributeSpec{});
    UniformHistorySampler sampler(w);
    TruthPointMassPredictor pred(20);
    SeededRng rng(7, 0);
    const CalibrationTable t = calibrate_lengths(sampler, pred, 0.1, 6, 100, rng);
    std::vector<CoverageRecord> records;
    for (int i = 0; i < 50; ++i) {
        const SampledHistory s = sampler.sample(1 + rng.index(6), rng);
        records.push_back(CoverageRecord{s.history, s.subject, false});
    }
    for (const auto& c : empirical_coverage(records, t, pred)) {
        REQUIRE(c.has_value());
        CHECK(*c == 1.0);
    }
}

TEST_CASE("coverage sandwich on held-out draws (small scale)") {
    const AttributeWorld w = make_synthetic_attribute_world(SyntheticAttributeSpec{});
    UniformHistorySampler sampler(w);
    ExactPosteriorPredictor base(w);
    MiscalibratedPredictor pred(base, MiscalibrationSpec{2.0, {}});
    const double alpha = 0.1;
    const std::size_t L = 3, R = 200;
    std::vector<double> mean(L, 0.0);
    for (std::size_t r = 0; r < R; ++r) {
        SeededRng rng(100 + r, 0);
        const JitterSpec jit{true, 1e-9};
        const auto table = calibrate_lengths(sampler, pred, alpha, L, 100, rng, jit);
        const auto test = calibration_scores(sampler, pred, L, 50, rng, jit);
        for (std::size_t k = 0; k < L; ++k) {
            double hit = 0;
            for (double s : test[k]) hit += s >= table.tau(k + 1);
            mean[k] += hit / 50.0 / double(R);
        }
    }
    for (double m : mean) {
        CHECK(m > 1.0 - alpha - 0.03);
        CHECK(m < 1.0 - alpha + 1.0 / 101.0 + 0.03);
    }
}
