#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cip/conformal.hpp"
#include "cip/llm/client.hpp"
#include "cip/pursuit.hpp"
#include "cip/worlds.hpp"

namespace cip::harness {

enum class WorldSourceKind { attribute_csv, instance_jsonl, synthetic_attribute, synthetic_instance, bisection };

struct WorldSource {
    WorldSourceKind kind = WorldSourceKind::synthetic_attribute;
    std::filesystem::path path;  // attribute_csv, instance_jsonl
    double answer_noise = 0.0;   // attribute worlds
    SyntheticAttributeSpec attribute;
    SyntheticInstanceSpec instance;
    std::size_t bits = 4;         // bisection
    std::size_t distractors = 2;  // bisection
};

enum class PredictorKind { exact, miscalibrated, point_mass, naive_bayes, llm };

struct PredictorSpec {
    PredictorKind kind = PredictorKind::exact;
    double temperature = 1.0;  // miscalibrated
    bool enumerate_labels = false;  // llm: number the labels when first tokens collide
};

struct ExperimentConfig {
    WorldSource world;
    PredictorSpec predictor;
    HypothesisMode hypotheses = HypothesisMode::predictor_posterior;
    std::string history_sampler = "uniform";  // uniform | dp
    std::vector<StrategyConfig> strategies;
    std::vector<double> alphas{0.1};  // expands cip strategies without their own alpha
    std::size_t max_iters = 20;       // L
    std::size_t n_cal = 100;          // N
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::size_t folds = 1;
    std::optional<std::size_t> episodes;  // cap on test episodes per (fold, seed)
    JitterSpec jitter{true, 1e-9};
    std::filesystem::path output_dir = "cip-out";
    std::size_t workers = 1;
    bool svg = false;
    llm::EndpointConfig endpoint;
    std::optional<std::filesystem::path> mock_fixture;

    void validate() const;
    // Strategy list with cip entries expanded over `alphas`, each carrying L.
    std::vector<StrategyConfig> expanded_strategies() const;
};

// Config document keys mirror the struct. Precedence, lowest to highest:
// built-in defaults, top-level keys (n_est, epsilon, accuracy_rule, ...),
// per-strategy keys, then command-line overrides.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<double>> alphas;
    std::optional<std::size_t> n_est;
    std::optional<std::size_t> max_iters;
    std::optional<std::vector<std::string>> strategies;  // kinds, replaces the list
    std::optional<std::filesystem::path> out;
    std::optional<std::size_t> workers;
    std::optional<std::string> endpoint;
    std::optional<std::filesystem::path> mock_fixture;
};
void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

struct Split {
    std::vector<std::size_t> est, cal, test;
};

// Shuffled three-way partition of 0..n-1 with sizes differing by at most one.
Split split_three_way(std::size_t n, std::uint64_t seed);
// Fold r (0, 1, 2) rotates the roles of the three parts.
Split rotate(const Split& s, std::size_t fold);

struct CurvePoint {
    std::size_t iteration = 0;
    std::optional<double> mean;
    double std = 0.0;
    std::size_t n = 0;
};

struct Curve {
    std::string strategy;
    std::vector<CurvePoint> points;  // iterations 1..L
};

struct CurveSet {
    std::size_t max_iters = 0;
    std::vector<Curve> accuracy;
    std::vector<Curve> coverage;
    std::vector<Curve> objective;
    std::vector<Curve> thresholds;
};

struct ErrorEntry {
    std::string stage;  // world | calibration | episode
    std::string strategy;
    std::optional<std::size_t> fold;
    std::optional<std::uint64_t> seed;
    std::string instance_id;
    std::string kind;
    std::string message;
};

struct ExperimentResult {
    CurveSet curves;
    std::vector<RunRecord> records;  // ordered by (fold, seed, strategy, subject)
    std::vector<ErrorEntry> errors;
    // One table per (strategy, fold, seed), keyed "strategy/f<fold>/s<seed>".
    std::map<std::string, CalibrationTable> tables;
    // Fixture of every mock-server response served, when a fixture was used.
    std::optional<std::string> mock_recording;
};

// Runs every fold and seed and aggregates curves. Stage failures are recorded
// in `errors` and the remaining work proceeds. Writes nothing.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// run_experiment followed by writing curves, records.jsonl, calibration tables
// and errors.json to cfg.output_dir.
ExperimentResult run_and_write(const ExperimentConfig& cfg);

// Records and tables written by run_and_write, with curves re-aggregated.
ExperimentResult reload_output(const std::filesystem::path& dir);

void emit_curves(const CurveSet& curves, const std::filesystem::path& dir, bool svg = false);
std::string curve_csv(const std::vector<Curve>& panel);
std::string errors_json(const std::vector<ErrorEntry>& errors);
std::string records_jsonl(const std::vector<RunRecord>& records);

// Coverage of a group of records against the table they were run with. Jitter
// draws come from a stream derived from (seed, fold) so the value can be
// recomputed from emitted records.
std::vector<std::optional<double>> coverage_for_group(const std::vector<RunRecord>& records,
                                                      const CalibrationTable& table, std::uint64_t seed,
                                                      std::size_t fold);

std::string table_key(const std::string& strategy, std::size_t fold, std::uint64_t seed);

// Curves from records. Accuracy and coverage are averaged within each
// (fold, seed) group, then summarised across groups; objectives are pooled
// over episodes. Strategies appear in `order`; those with a table for some
// group also get coverage and threshold curves.
CurveSet aggregate_curves(const std::vector<RunRecord>& records, const std::vector<std::string>& order,
                          const std::map<std::string, CalibrationTable>& tables, std::size_t max_iters);

// Calibrates one table for the configured world and predictor (first fold).
CalibrationTable calibrate(const ExperimentConfig& cfg, double alpha, std::uint64_t seed);

// Per-length coverage of `table` on `n_test` fresh histories per length,
// drawn from the configured history sampler on a stream independent of
// calibration.
std::vector<double> holdout_coverage(const ExperimentConfig& cfg, const CalibrationTable& table, std::uint64_t seed,
                                     std::size_t n_test);

// Reads y/yes/n/no (or any nonempty line in free-text mode) from `in`,
// prompting on `out`. q/quit or end of input ends the episode. Malformed
// replies re-prompt without consuming an iteration.
class TerminalAnswerer : public Answerer {
public:
    TerminalAnswerer(std::istream& in, std::ostream& out, bool free_text = false)
        : in_(in), out_(out), free_text_(free_text) {}
    std::optional<Answer> answer(const Query& q, SeededRng& rng) override;

private:
    std::istream& in_;
    std::ostream& out_;
    bool free_text_;
    std::size_t asked_ = 0;
};

// A human holds the label; the strategy picks questions from the closed
// attribute world of `cfg`.
RunRecord interactive_play(const ExperimentConfig& cfg, const StrategyConfig& strategy, std::uint64_t seed,
                           std::istream& in, std::ostream& out);

}  // namespace cip::harness
