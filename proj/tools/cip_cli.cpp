// Command-line front end. Flags override the corresponding config fields.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cip/harness.hpp"

using namespace cip;
using namespace cip::harness;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<double> alphas;
    std::optional<std::size_t> n_est;
    std::optional<std::size_t> max_iters;
    std::vector<std::string> strategies;
    std::string out;
    std::optional<std::size_t> workers;
    std::string endpoint;
    std::string mock_fixture;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "experiment config (JSON)");
    app->add_option("--seed", f.seed, "run with this single seed");
    app->add_option("--alpha", f.alphas, "miscoverage level(s) for cip")->delimiter(',');
    app->add_option("--n-est", f.n_est, "hypotheses per candidate estimate");
    app->add_option("--max-iters", f.max_iters, "maximum number of queries (L)");
    app->add_option("--strategy", f.strategies, "strategies: ip, cip, random, dp")->delimiter(',');
    app->add_option("--out", f.out, "output directory");
    app->add_option("--workers", f.workers, "worker threads");
    app->add_option("--endpoint", f.endpoint, "chat-completions base URL");
    app->add_option("--mock-fixture", f.mock_fixture, "serve LLM calls from this mock fixture");
}

ExperimentConfig resolve(const CommonFlags& f) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        cfg = load_config(f.config);
    } else {
        cfg.strategies = {StrategyConfig{}};
    }
    Overrides o;
    o.seed = f.seed;
    if (!f.alphas.empty()) o.alphas = f.alphas;
    o.n_est = f.n_est;
    o.max_iters = f.max_iters;
    if (!f.strategies.empty()) o.strategies = f.strategies;
    if (!f.out.empty()) o.out = f.out;
    o.workers = f.workers;
    if (!f.endpoint.empty()) o.endpoint = f.endpoint;
    if (!f.mock_fixture.empty()) o.mock_fixture = f.mock_fixture;
    apply_overrides(cfg, o);
    return cfg;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int cmd_calibrate(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    for (std::uint64_t seed : cfg.seeds) {
        for (double alpha : cfg.alphas) {
            const CalibrationTable table = calibrate(cfg, alpha, seed);
            const auto path = cfg.output_dir / ("calibration_alpha" + fmt(alpha) + "_s" + std::to_string(seed) + ".json");
            std::ofstream(path, std::ios::binary) << table.to_json();
            std::cout << path.string() << "\n";
        }
    }
    return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
    const ExperimentResult r = run_and_write(cfg);
    std::cout << r.records.size() << " episodes, " << r.errors.size() << " errors, outputs in "
              << cfg.output_dir.string() << "\n";
    for (const auto& c : r.curves.accuracy) {
        const auto& last = c.points.back();
        std::cout << "  " << c.strategy << ": accuracy at L = " << (last.mean ? fmt(*last.mean) : "n/a") << "\n";
    }
    return r.errors.empty() ? 0 : 2;
}

// Coverage of emitted records against their tables, or of fresh calibrated
// tables on freshly sampled test histories when no run directory is given.
int cmd_coverage(const ExperimentConfig& cfg, const std::string& from, std::size_t n_test) {
    if (!from.empty()) {
        const ExperimentResult r = reload_output(from);
        std::cout << curve_csv(r.curves.coverage);
        return 0;
    }
    std::cout << "alpha,seed,length,tau,coverage,lower,upper\n";
    for (std::uint64_t seed : cfg.seeds) {
        for (double alpha : cfg.alphas) {
            const CalibrationTable table = calibrate(cfg, alpha, seed);
            const std::vector<double> cov = holdout_coverage(cfg, table, seed, n_test);
            const double upper = 1.0 - alpha + 1.0 / static_cast<double>(cfg.n_cal + 1);
            for (std::size_t k = 1; k <= table.max_length(); ++k) {
                std::cout << fmt(alpha) << "," << seed << "," << k << "," << fmt(table.tau(k)) << ","
                          << fmt(cov[k - 1]) << "," << fmt(1.0 - alpha) << "," << fmt(upper) << "\n";
            }
        }
    }
    return 0;
}

int cmd_emit(const std::string& from, const std::string& out, bool svg) {
    const ExperimentResult r = reload_output(from);
    emit_curves(r.curves, out.empty() ? std::filesystem::path(from) : std::filesystem::path(out), svg);
    return 0;
}

int cmd_play(const ExperimentConfig& cfg, const std::string& record_out) {
    StrategyConfig s = cfg.strategies.front();
    const RunRecord rec = interactive_play(cfg, s, cfg.seeds.front(), std::cin, std::cout);
    if (!record_out.empty()) std::ofstream(record_out, std::ios::binary) << record_to_json(rec) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Information pursuit and conformal information pursuit experiments"};
    app.require_subcommand(1);

    CommonFlags cal_f, run_f, cov_f, play_f, emit_f;
    auto* cal = app.add_subcommand("calibrate", "calibrate per-length thresholds and write table JSON");
    add_common(cal, cal_f);
    auto* run = app.add_subcommand("run", "run an experiment and write curves, records and tables");
    add_common(run, run_f);
    auto* cov = app.add_subcommand("coverage", "per-length empirical coverage");
    add_common(cov, cov_f);
    std::string cov_from;
    cov->add_option("--from", cov_from, "run output directory to evaluate");
    std::size_t n_test = 1000;
    cov->add_option("--n-test", n_test, "fresh test histories per length");
    auto* play = app.add_subcommand("play", "play the game against a strategy, answering on the terminal");
    add_common(play, play_f);
    std::string record_out;
    play->add_option("--record", record_out, "write the episode record here");
    auto* emit = app.add_subcommand("emit", "re-emit curve CSVs (and SVGs) from a run directory");
    add_common(emit, emit_f);
    std::string emit_from;
    bool svg = false;
    emit->add_option("--from", emit_from, "run output directory")->required();
    emit->add_flag("--svg", svg, "also write SVG plots");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*cal) return cmd_calibrate(resolve(cal_f));
        if (*run) return cmd_run(resolve(run_f));
        if (*cov) return cmd_coverage(resolve(cov_f), cov_from, n_test);
        if (*play) return cmd_play(resolve(play_f), record_out);
        if (*emit) return cmd_emit(emit_from, emit_f.out, svg);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
