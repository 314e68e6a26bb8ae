#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "cip/core.hpp"
#include "cip/core/parallel.hpp"

using namespace cip;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::io;
}

}  // namespace

TEST_CASE("softmax of equal logits is uniform") {
    const std::vector<double> z{0.0, 0.0};
    const Distribution d = softmax(z);
    CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("softmax of [ln 3, 0, 0, 0]") {
    const std::vector<double> z{std::log(3.0), 0.0, 0.0, 0.0};
    const Distribution d = softmax(z);
    CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-12));
    for (int i = 1; i < 4; ++i) CHECK(d[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("softmax is shift invariant") {
    const std::vector<double> a{5, 5, 5}, b{0, 0, 0};
    CHECK(softmax(a) == softmax(b));
}

TEST_CASE("softmax errors") {
    const std::vector<double> bad{0.0, std::numeric_limits<double>::infinity()};
    CHECK(kind_of([&] { softmax(bad); }) == ErrorKind::invalid_input);
    const std::vector<double> three{0, 1, 2};
    CHECK(kind_of([&] { softmax(three, 4); }) == ErrorKind::shape);
}

TEST_CASE("softmax property: valid output, argmax kept, values inside (0, 1)") {
    SeededRng rng(101, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng.index(30);
        const double scale = trial % 5 == 0 ? 50.0 : 5.0;
        std::vector<double> z(n);
        for (auto& v : z) v = scale * (2.0 * rng.uniform() - 1.0);
        const Distribution d = softmax(z);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(d[i] > 0.0);
            CHECK(d[i] < 1.0);
            sum += d[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        const auto zmax = std::max_element(z.begin(), z.end()) - z.begin();
        CHECK(d.argmax() == static_cast<std::size_t>(zmax));
    }
}

TEST_CASE("distribution validation and floor") {
    CHECK(kind_of([] { Distribution({0.5, 0.6}); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { Distribution({-0.1, 1.1}); }) == ErrorKind::invalid_input);
    const Distribution f = Distribution::floored({1.0, 0.0, 0.0});
    CHECK(f[1] == doctest::Approx(1e-12).epsilon(1e-6));
    CHECK(f[0] < 1.0);
    const Distribution pm = Distribution::point_mass(3, 1);
    CHECK(pm[1] == 1.0);
    CHECK(pm.unique_argmax_is(1));
    CHECK_FALSE(Distribution::uniform(4).unique_argmax_is(0));
}

TEST_CASE("label space invariants") {
    CHECK(kind_of([] { LabelSpace({"a"}); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { LabelSpace({"a", "a"}); }) == ErrorKind::invalid_input);
    LabelSpace ls({"cat", "dog", "emu"});
    CHECK(ls.size() == 3);
    CHECK(*ls.index_of("dog") == 1);
    CHECK_FALSE(ls.index_of("yak").has_value());
}

TEST_CASE("first-token collisions and the enumeration escape hatch") {
    LabelSpace ls({"polar bear", "polar fox", "lion"});
    const TokenMap tm = TokenMap::leading_word(ls);
    CHECK(kind_of([&] { check_first_tokens(ls, tm); }) == ErrorKind::configuration);
    const EnumeratedLabels e = enumerate_labels(ls, EnumerationStyle::letters);
    CHECK(e.labels.name(0) == "A. polar bear");
    CHECK(e.tokens.first_token("B. polar fox") == "B");
    check_first_tokens(e.labels, e.tokens);
}

TEST_CASE("history_extend base case and immutability") {
    const Query q1("q1", "Does it fly?"), q2("q2", "Is it big?");
    const History empty;
    const History h1 = history_extend(empty, q1, Answer::yes());
    CHECK(empty.size() == 0);
    REQUIRE(h1.size() == 1);
    CHECK(h1[0].query == q1);
    CHECK(h1[0].answer.is_yes());
    const History h2 = history_extend(h1, q2, Answer::no());
    CHECK(h1.size() == 1);
    CHECK(h2.size() == 2);
    CHECK(h2[1].answer == Answer::no());
    CHECK(kind_of([&] { history_extend(h1, q1, Answer::no()); }) == ErrorKind::duplicate_query);
    History open(false);
    open = open.extend(q1, Answer::yes());
    CHECK(open.extend(q1, Answer::no()).size() == 2);
}

TEST_CASE("history_extend property: append-only") {
    SeededRng rng(7, 3);
    for (int trial = 0; trial < 100; ++trial) {
        History h(false);
        std::vector<History> snapshots;
        const std::size_t n = 1 + rng.index(12);
        for (std::size_t i = 0; i < n; ++i) {
            snapshots.push_back(h);
            h = h.extend(Query("q" + std::to_string(rng.index(5)), "text"), Answer::binary(rng.bernoulli(0.5)));
        }
        for (const auto& s : snapshots) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                CHECK(h[i].query == s[i].query);
                CHECK(h[i].answer == s[i].answer);
            }
            CHECK(h.prefix(s.size()).size() == s.size());
        }
    }
}

TEST_CASE("render_history") {
    CHECK(render_history(History{}) == std::string("You have not gathered any information yet."));
    const Query q1("q1", "Does it have stripes?"), q2("q2", "Is it a carnivore?");
    const History h1 = History{}.extend(q1, Answer::yes());
    CHECK(render_history(h1) == "1. Does it have stripes? Yes.");
    const History h2 = h1.extend(q2, Answer::no());
    CHECK(render_history(h2) == "1. Does it have stripes? Yes.\n2. Is it a carnivore? No.");
    CHECK(render_history(h2, RenderStyle::transcript).find("Q: Is it a carnivore?") != std::string::npos);
    CHECK(render_history(h2) == render_history(h2));
}

TEST_CASE("answer and query validation") {
    CHECK(kind_of([] { Answer::free_text(""); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { Query("", "x"); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { Query("q", ""); }) == ErrorKind::invalid_input);
    CHECK(Answer::free_text("It has a tail.").sentence() == "It has a tail.");
    CHECK(Answer::no().sentence() == "No.");
}

TEST_CASE("seeded rng reproduces and separates streams") {
    SeededRng a(42, 1), b(42, 1), c(42, 2);
    std::vector<std::uint64_t> va, vb, vc;
    for (int i = 0; i < 64; ++i) {
        va.push_back(a.next_u64());
        vb.push_back(b.next_u64());
        vc.push_back(c.next_u64());
    }
    CHECK(va == vb);
    CHECK(va != vc);
    // fork depends only on (seed, stream, substream), not on draws made so far.
    SeededRng d(42, 1);
    d.next_u64();
    CHECK(d.fork(9).next_u64() == SeededRng(42, 1).fork(9).next_u64());
}

TEST_CASE("rng index is uniform (chi-square)") {
    SeededRng rng(5, 5);
    const std::size_t k = 10, n = 20000;
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) counts[rng.index(k)] += 1.0;
    double chi = 0.0;
    const double e = double(n) / double(k);
    for (double c : counts) chi += (c - e) * (c - e) / e;
    CHECK(chi < 21.67);  // 0.99 quantile, 9 degrees of freedom
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::count(hits.begin(), hits.end(), 1) == 1000);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 5) fail(ErrorKind::selection, "boom");
                    }),
                    Error);
}

TEST_CASE("error messages carry locations") {
    try {
        fail(ErrorKind::parse, "bad cell", 3, 2);
    } catch (const Error& e) {
        CHECK(e.line() == std::optional<std::size_t>(3));
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}
