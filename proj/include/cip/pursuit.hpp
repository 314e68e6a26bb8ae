#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cip/conformal.hpp"
#include "cip/core.hpp"

namespace cip {

enum class StrategyKind { ip, cip, random, dp };
enum class AccuracyRule { carry_after_correct, carry_after_stop };
enum class QuerySetMode { closed, open };

std::string to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(const std::string& text);
std::string to_string(AccuracyRule rule);
AccuracyRule parse_accuracy_rule(const std::string& text);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::ip;
    std::size_t n_est = 4;
    std::optional<double> alpha;  // cip only
    double epsilon = 0.01;
    std::size_t max_iters = 20;   // L
    std::size_t m = 3;            // proposals per step, open-set mode
    AccuracyRule accuracy_rule = AccuracyRule::carry_after_correct;
    QuerySetMode query_set = QuerySetMode::closed;
    EmptySetPolicy empty_set_policy = EmptySetPolicy::count_as_full;
    std::string name;             // label in outputs; derived when empty

    void validate() const;
    std::string display_name() const;
};

struct CandidateScore {
    Query query;
    std::optional<double> value;  // nullopt when the evaluation failed
    double std_error = 0.0;
    std::string error;
};

struct Selection {
    std::size_t index = 0;
    Query query;
    std::vector<CandidateScore> scores;
};

// Lowest index among values within `tol` of the minimum; nullopt entries are skipped.
std::optional<std::size_t> argmin_lowest_index(const std::vector<std::optional<double>>& values, double tol = 1e-9);

Selection select_query_ip(const std::vector<Query>& candidates, const History& h, const Predictor& predictor,
                          const HypothesisSampler& sampler, std::size_t n_est, SeededRng& rng,
                          const Subject& episode = {}, std::size_t workers = 1);

// `k` is the current history length; sets are scored at tau(k + 1).
Selection select_query_cip(const std::vector<Query>& candidates, const History& h, const Predictor& predictor,
                           const HypothesisSampler& sampler, const CalibrationTable& table, std::size_t k,
                           std::size_t n_est, SeededRng& rng, const Subject& episode = {},
                           EmptySetPolicy policy = EmptySetPolicy::count_as_full, std::size_t workers = 1);

// Uniform over the not-yet-asked candidates; nullopt when none remain.
std::optional<Query> select_query_random(const std::vector<Query>& remaining, SeededRng& rng);

// Rejects a proposal already in a closed-set history, re-asks once, then fails.
Query select_query_dp(const QueryProposer& proposer, const History& h, const Subject& subject = {});

double sigma_hat(const std::vector<double>& objectives);
bool stopping_check(const std::vector<double>& objectives, double epsilon);

struct RunRow {
    std::size_t iteration = 0;
    std::vector<std::string> candidates;
    std::vector<std::optional<double>> objectives;
    std::vector<double> std_errors;
    std::optional<double> sigma;
    std::optional<double> chosen_objective;
    std::optional<Query> query;
    std::optional<Answer> answer;
    std::size_t history_length = 0;
    std::vector<double> posterior;
    std::size_t prediction = 0;
    std::optional<bool> correct;
    std::optional<std::size_t> set_size;
    bool stopped = false;
};

struct RunRecord {
    std::string strategy;
    std::string instance_id;
    std::optional<std::size_t> true_label;
    std::optional<std::string> true_label_name;
    bool human_held = false;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::size_t fold = 0;  // cross-validation fold, set by the harness
    std::string status;  // complete | stopped | exhausted | error | user-terminated
    std::optional<std::string> error;
    std::optional<std::size_t> stop_iteration;
    std::vector<double> initial_posterior;
    std::size_t initial_prediction = 0;
    std::vector<RunRow> rows;
    std::optional<std::vector<int>> accuracy;  // 1..L under the accuracy rule
};

// Accuracy indicator for iterations 1..L under the given carry rule.
std::vector<int> accuracy_curve(const RunRecord& record, AccuracyRule rule, std::size_t max_iters);

std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(const std::string& line);

// Posteriors of the answered rows, for coverage evaluation.
CoverageTrace trace_from_record(const RunRecord& record);

struct EpisodeSetup {
    const World* world = nullptr;  // candidate queries and labels
    std::size_t subject = 0;
    std::optional<std::size_t> true_label;  // nullopt when the truth is held by a human
    std::string instance_id;
};

struct EpisodeOracles {
    const Predictor* predictor = nullptr;
    const HypothesisSampler* sampler = nullptr;  // ip, cip
    const QueryProposer* proposer = nullptr;     // dp, open-set mode
    const CalibrationTable* table = nullptr;     // cip; also used for set sizes when present
    Answerer* answerer = nullptr;
};

struct EpisodeOptions {
    std::size_t workers = 1;  // candidate fan-out
    std::function<void(const RunRow&)> on_row;
};

RunRecord run_episode(const StrategyConfig& cfg, const EpisodeSetup& setup, const EpisodeOracles& oracles,
                      SeededRng& rng, const EpisodeOptions& options = {});

// Rewrites answers through `hook` (for paraphrasing free text); identity by default.
class ParaphrasingAnswerer : public Answerer {
public:
    using Hook = std::function<Answer(const Answer&, const Query&, SeededRng&)>;
    ParaphrasingAnswerer(Answerer& inner, Hook hook) : inner_(inner), hook_(std::move(hook)) {}
    std::optional<Answer> answer(const Query& q, SeededRng& rng) override;

private:
    Answerer& inner_;
    Hook hook_;
};

}  // namespace cip
