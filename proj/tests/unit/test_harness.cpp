#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "cip/harness.hpp"
#include "fixtures.hpp"

using namespace cip;
using namespace cip::harness;
namespace fs = std::filesystem;

namespace {

const std::string kData = CIP_TEST_DATA;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cip-harness-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::io;
}

ExperimentConfig bisection_config() {
    return parse_config(R"({"world": {"source": "bisection", "bits": 4, "distractors": 2},
        "predictor": {"kind": "exact"}, "hypotheses": "exhaustive",
        "strategies": ["ip", "cip"], "alphas": [0.1], "max_iters": 8, "N": 100, "seeds": [0, 1, 2]})");
}

}  // namespace

TEST_CASE("three-way split sizes") {
    const Split s9 = split_three_way(9, 0);
    CHECK(s9.est.size() == 3);
    CHECK(s9.cal.size() == 3);
    CHECK(s9.test.size() == 3);
    const Split s290 = split_three_way(290, 4);
    for (std::size_t fold = 0; fold < 3; ++fold) {
        const Split r = rotate(s290, fold);
        std::vector<std::size_t> sizes{r.est.size(), r.cal.size(), r.test.size()};
        std::sort(sizes.begin(), sizes.end());
        CHECK(sizes == std::vector<std::size_t>{96, 97, 97});
    }
    CHECK(kind_of([] { split_three_way(2, 0); }) == ErrorKind::invalid_input);
}

TEST_CASE("split determinism and rotation") {
    const Split a = split_three_way(50, 7), b = split_three_way(50, 7), c = split_three_way(50, 8);
    CHECK(a.est == b.est);
    CHECK(a.cal == b.cal);
    CHECK(a.test == b.test);
    CHECK(a.est != c.est);
    // every part plays every role exactly once over the three folds
    std::set<std::vector<std::size_t>> tests;
    for (std::size_t f = 0; f < 3; ++f) tests.insert(rotate(a, f).test);
    CHECK(tests.size() == 3);
    CHECK(rotate(a, 0).est == a.est);
}

TEST_CASE("property: splits partition the instances") {
    SeededRng gen(30, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + gen.index(400);
        const Split s = rotate(split_three_way(n, gen.next_u64()), gen.index(3));
        std::vector<std::size_t> all;
        for (const auto* part : {&s.est, &s.cal, &s.test}) all.insert(all.end(), part->begin(), part->end());
        std::sort(all.begin(), all.end());
        CHECK(all.size() == n);
        for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
        const auto [lo, hi] = std::minmax({s.est.size(), s.cal.size(), s.test.size()});
        CHECK(hi - lo <= 1);
    }
}

TEST_CASE("config parsing, validation and precedence") {
    CHECK(kind_of([] { parse_config(R"({"strategies": []})"); }) == ErrorKind::configuration);
    CHECK(kind_of([] { parse_config(R"({"strategies": ["ip"], "seeds": []})"); }) == ErrorKind::configuration);
    CHECK(kind_of([] { parse_config(R"({"strategies": ["ip"], "bogus": 1})"); }) == ErrorKind::configuration);
    CHECK(kind_of([] { parse_config(R"({"strategies": ["ip"], "folds": 0})"); }) == ErrorKind::configuration);
    CHECK(kind_of([] { parse_config(R"({"strategies": ["cip"], "alphas": [0.6]})"); }) == ErrorKind::configuration);

    ExperimentConfig cfg = parse_config(R"({"strategies": ["ip", {"kind": "cip", "n_est": 12}],
        "n_est": 8, "epsilon": 0.05, "alphas": [0.05, 0.1], "max_iters": 7})");
    const auto ex = cfg.expanded_strategies();
    REQUIRE(ex.size() == 3);
    CHECK(ex[0].n_est == 8);
    CHECK(ex[0].epsilon == 0.05);
    CHECK(ex[1].n_est == 12);
    CHECK(*ex[1].alpha == 0.05);
    CHECK(*ex[2].alpha == 0.1);
    CHECK(ex[2].max_iters == 7);
    CHECK(ex[1].display_name() != ex[2].display_name());

    Overrides o;
    o.n_est = 2;
    o.max_iters = 3;
    o.alphas = std::vector<double>{0.15};
    o.seed = 42;
    apply_overrides(cfg, o);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{42});
    for (const auto& s : cfg.expanded_strategies()) {
        CHECK(s.n_est == 2);
        CHECK(s.max_iters == 3);
        if (s.kind == StrategyKind::cip) CHECK(*s.alpha == 0.15);
    }
}

TEST_CASE("bisection experiment reaches accuracy 1 at iteration 4 on every seed") {
    const ExperimentResult r = run_experiment(bisection_config());
    CHECK(r.errors.empty());
    for (const auto& c : r.curves.accuracy) {
        REQUIRE(c.points.size() == 8);
        CHECK(*c.points[2].mean == 0.0);
        CHECK(*c.points[3].mean == 1.0);
        CHECK(c.points[3].std == 0.0);
        CHECK(c.points[3].n == 3);
    }
    CHECK(r.records.size() == 2 * 3 * 16);
    CHECK(r.tables.size() == 3);
}

TEST_CASE("point-mass predictor under C-IP gives full coverage and singleton sets") {
    const ExperimentConfig cfg = parse_config(R"({"world": {"source": "synthetic_attribute"},
        "predictor": {"kind": "point_mass"}, "strategies": ["cip"], "max_iters": 20, "N": 100, "seeds": [0, 1],
        "jitter": {"enabled": false}})");
    const ExperimentResult r = run_experiment(cfg);
    CHECK(r.errors.empty());
    for (const auto& [key, table] : r.tables)
        for (double t : table.thresholds()) CHECK(t <= 1.0);
    REQUIRE(r.curves.coverage.size() == 1);
    bool any = false;
    for (const auto& p : r.curves.coverage[0].points) {
        if (!p.mean) continue;
        any = true;
        CHECK(*p.mean == 1.0);
    }
    CHECK(any);
    for (const auto& rec : r.records)
        for (const auto& row : rec.rows)
            if (row.set_size) CHECK(*row.set_size == 1);
    const auto held = holdout_coverage(cfg, r.tables.begin()->second, 0, 200);
    for (double c : held) CHECK(c == 1.0);
}

TEST_CASE("stage failures land in the error manifest") {
    const ExperimentConfig cfg = parse_config(R"({"world": {"source": "instance_jsonl", "path": ")" + kData +
                                              R"(/malformed_line7.jsonl"}, "predictor": {"kind": "naive_bayes"},
        "strategies": ["ip"], "seeds": [0]})");
    const ExperimentResult r = run_experiment(cfg);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].stage == "world");
    CHECK(r.errors[0].kind == "parse");
    const auto manifest = nlohmann::json::parse(errors_json(r.errors));
    CHECK(manifest.at("ok") == false);
    CHECK(manifest.at("errors").at(0).at("stage") == "world");
    CHECK(nlohmann::json::parse(errors_json({})).at("ok") == true);
}

TEST_CASE("curve emission shape, missing cells and byte stability") {
    CurveSet cs;
    cs.max_iters = 20;
    for (const char* name : {"ip", "cip"}) {
        Curve acc{name, {}}, cov{name, {}};
        for (std::size_t k = 1; k <= 20; ++k) {
            acc.points.push_back(CurvePoint{k, 0.05 * k, 0.01, 5});
            cov.points.push_back(k % 2 ? CurvePoint{k, 0.9, 0.0, 5} : CurvePoint{k, std::nullopt, 0.0, 0});
        }
        cs.accuracy.push_back(acc);
        cs.coverage.push_back(cov);
    }
    const std::string csv = curve_csv(cs.accuracy);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
    CHECK(csv.rfind("strategy,iteration,mean,std,n\n", 0) == 0);
    const std::string cov = curve_csv(cs.coverage);
    CHECK(cov.find("ip,2,,,0\n") != std::string::npos);
    CHECK(cov.find("ip,2,0,") == std::string::npos);

    const fs::path a = scratch("emit-a"), b = scratch("emit-b");
    emit_curves(cs, a, true);
    emit_curves(cs, b, true);
    for (const char* f : {"accuracy.csv", "coverage.csv", "objective.csv", "thresholds.csv", "accuracy.svg"}) {
        CHECK(slurp(a / f) == slurp(b / f));
        CHECK_FALSE(slurp(a / f).empty());
    }
    const fs::path blocker = scratch("blocker");
    fs::create_directories(blocker.parent_path());
    std::ofstream(blocker) << "file";
    CHECK(kind_of([&] { emit_curves(cs, blocker / "sub"); }) == ErrorKind::io);
}

TEST_CASE("interactive play replays the batch episode") {
    const ExperimentConfig cfg = bisection_config();
    const StrategyConfig ip = cfg.expanded_strategies()[0];
    const AttributeWorld w = make_bisection_world(4, 2);
    ExactPosteriorPredictor pred(w);
    PosteriorHypothesisSampler sampler(w, &pred, HypothesisMode::exhaustive);
    for (std::size_t truth : {0u, 10u, 15u}) {
        WorldAnswerer answerer(w, truth);
        SeededRng rng(3, 0);
        const RunRecord batch =
            run_episode(ip, EpisodeSetup{&w, truth, truth, w.subject_id(truth)},
                        EpisodeOracles{&pred, &sampler, nullptr, nullptr, &answerer}, rng);
        std::string script = "maybe\n";
        for (const auto& row : batch.rows)
            if (row.answer) script += row.answer->is_yes() ? "y\n" : "no\n";
        std::istringstream in(script);
        std::ostringstream out;
        const RunRecord played = interactive_play(cfg, ip, 3, in, out);
        CHECK(played.human_held);
        CHECK_FALSE(played.true_label.has_value());
        CHECK(played.status == batch.status);
        REQUIRE(played.rows.size() == batch.rows.size());
        for (std::size_t i = 0; i < batch.rows.size(); ++i) {
            CHECK(played.rows[i].query == batch.rows[i].query);
            CHECK(played.rows[i].posterior == batch.rows[i].posterior);
            CHECK(played.rows[i].objectives == batch.rows[i].objectives);
            CHECK(played.rows[i].prediction == batch.rows[i].prediction);
        }
        CHECK(played.rows[3].prediction == truth);
        CHECK(out.str().find("Please reply y or n") != std::string::npos);
    }
}

TEST_CASE("interactive play: quitting and end of input") {
    const ExperimentConfig cfg = bisection_config();
    const StrategyConfig ip = cfg.expanded_strategies()[0];
    for (const char* script : {"q\n", "", "quit\n"}) {
        std::istringstream in(script);
        std::ostringstream out;
        const RunRecord r = interactive_play(cfg, ip, 0, in, out);
        CHECK(r.rows.empty());
        CHECK(r.status == "user-terminated");
    }
    std::istringstream in("maybe\nperhaps\ny\nq\n");
    std::ostringstream out;
    const RunRecord r = interactive_play(cfg, ip, 0, in, out);
    CHECK(r.rows.size() == 1);
    CHECK(r.status == "user-terminated");
}

TEST_CASE("terminal answerer free-text mode") {
    std::istringstream in("\nIt has stripes.\n");
    std::ostringstream out;
    TerminalAnswerer t(in, out, true);
    SeededRng rng(0, 0);
    const auto a = t.answer(Query("q", "Describe it?", QueryOrigin::proposed), rng);
    REQUIRE(a.has_value());
    CHECK(a->value() == "It has stripes.");
}

TEST_CASE("emitted coverage equals coverage recomputed from the records") {
    ExperimentConfig cfg = parse_config(R"({"world": {"source": "synthetic_attribute", "answer_noise": 0.1},
        "predictor": {"kind": "miscalibrated", "temperature": 3}, "strategies": ["ip", "cip", "random"],
        "alphas": [0.1, 0.2], "max_iters": 10, "N": 40, "seeds": [0, 1], "episodes": 10})");
    cfg.output_dir = scratch("selfcheck");
    const ExperimentResult r = run_and_write(cfg);
    CHECK(r.errors.empty());
    const ExperimentResult back = reload_output(cfg.output_dir);
    CHECK(back.records.size() == r.records.size());
    CHECK(records_jsonl(back.records) == records_jsonl(r.records));
    CHECK(curve_csv(back.curves.coverage) == curve_csv(r.curves.coverage));
    CHECK(curve_csv(back.curves.accuracy) == curve_csv(r.curves.accuracy));
    CHECK(curve_csv(r.curves.coverage) == slurp(cfg.output_dir / "coverage.csv"));

    // independent recomputation for one group
    const std::string name = r.curves.coverage[0].strategy;
    std::vector<RunRecord> group;
    for (const auto& rec : r.records)
        if (rec.strategy == name && rec.seed == 1) group.push_back(rec);
    const auto cov = coverage_for_group(group, r.tables.at(table_key(name, 0, 1)), 1, 0);
    CHECK(cov.size() == 10);
    CHECK(cov[0].has_value());
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
    ExperimentConfig cfg = parse_config(R"({"world": {"source": "synthetic_instance"},
        "predictor": {"kind": "naive_bayes"}, "strategies": ["ip", "cip", "random"], "alphas": [0.1],
        "max_iters": 6, "N": 30, "seeds": [0, 1], "folds": 3, "episodes": 8, "accuracy_rule": "carry_after_stop"})");
    std::vector<fs::path> dirs;
    for (std::size_t workers : {1u, 1u, 3u}) {
        cfg.workers = workers;
        cfg.output_dir = scratch("det-" + std::to_string(dirs.size()));
        const ExperimentResult r = run_and_write(cfg);
        CHECK(r.errors.empty());
        dirs.push_back(cfg.output_dir);
    }
    std::vector<std::string> names;
    for (const auto& e : fs::recursive_directory_iterator(dirs[0]))
        if (e.is_regular_file()) names.push_back(fs::relative(e.path(), dirs[0]).string());
    CHECK(names.size() >= 8);
    for (const auto& n : names) {
        CHECK(slurp(dirs[0] / n) == slurp(dirs[1] / n));
        CHECK(slurp(dirs[0] / n) == slurp(dirs[2] / n));
    }
}

TEST_CASE("calibrate produces a valid table for the configured world") {
    const ExperimentConfig cfg = bisection_config();
    const CalibrationTable t = calibrate(cfg, 0.1, 0);
    CHECK(t.max_length() == 8);
    CHECK(t.n() == 100);
    CHECK(CalibrationTable::from_json(t.to_json()).to_json() == t.to_json());
    CHECK(calibrate(cfg, 0.1, 0).to_json() == t.to_json());
}
