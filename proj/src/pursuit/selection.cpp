#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cip/infotheory.hpp"
#include "cip/pursuit.hpp"

namespace cip {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::ip: return "ip";
        case StrategyKind::cip: return "cip";
        case StrategyKind::random: return "random";
        case StrategyKind::dp: return "dp";
    }
    return "?";
}

StrategyKind parse_strategy_kind(const std::string& text) {
    if (text == "ip") return StrategyKind::ip;
    if (text == "cip") return StrategyKind::cip;
    if (text == "random") return StrategyKind::random;
    if (text == "dp") return StrategyKind::dp;
    fail(ErrorKind::configuration, "unknown strategy '" + text + "'");
}

std::string to_string(AccuracyRule rule) {
    return rule == AccuracyRule::carry_after_correct ? "carry-after-correct" : "carry-after-stop";
}

AccuracyRule parse_accuracy_rule(const std::string& text) {
    std::string t = text;
    std::replace(t.begin(), t.end(), '_', '-');
    if (t == "carry-after-correct") return AccuracyRule::carry_after_correct;
    if (t == "carry-after-stop") return AccuracyRule::carry_after_stop;
    fail(ErrorKind::configuration, "unknown accuracy rule '" + text + "'");
}

void StrategyConfig::validate() const {
    if (max_iters < 1) fail(ErrorKind::configuration, "L must be at least 1");
    if (!(epsilon > 0.0)) fail(ErrorKind::configuration, "epsilon must be positive");
    if (n_est < 1) fail(ErrorKind::configuration, "n_est must be at least 1");
    if (m < 1) fail(ErrorKind::configuration, "m must be at least 1");
    if (kind == StrategyKind::cip && alpha && !(*alpha > 0.0 && *alpha < 0.5)) {
        fail(ErrorKind::configuration, "alpha must lie in (0, 0.5)");
    }
}

std::string StrategyConfig::display_name() const {
    if (!name.empty()) return name;
    std::string out = to_string(kind);
    if (kind == StrategyKind::cip && alpha) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", *alpha);
        out += "(alpha=" + std::string(buf) + ")";
    }
    if (query_set == QuerySetMode::open) out += "-open";
    return out;
}

std::optional<std::size_t> argmin_lowest_index(const std::vector<std::optional<double>>& values, double tol) {
    std::optional<double> best;
    for (const auto& v : values) {
        if (v && (!best || *v < *best)) best = *v;
    }
    if (!best) return std::nullopt;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] && *values[i] <= *best + tol) return i;
    }
    return std::nullopt;
}

namespace {

using Evaluator = std::function<std::pair<double, double>(const Query&, SeededRng&)>;

Selection select_by_objective(const std::vector<Query>& candidates, const History& h, const Predictor& predictor,
                              SeededRng& rng, std::size_t workers, const Evaluator& evaluate) {
    if (candidates.empty()) fail(ErrorKind::selection, "no candidate queries");
    for (const auto& q : candidates) {
        if (h.closed_set() && h.contains(q.id)) fail(ErrorKind::selection, "candidate '" + q.id + "' already asked");
    }
    Selection sel;
    sel.scores.resize(candidates.size());
    const SeededRng base = rng.fork(rng.next_u64());
    parallel_for(candidates.size(), predictor.concurrent_safe() ? workers : 1, [&](std::size_t i) {
        auto& score = sel.scores[i];
        score.query = candidates[i];
        SeededRng stream = base.fork(i);
        try {
            auto [value, se] = evaluate(candidates[i], stream);
            score.value = value;
            score.std_error = se;
        } catch (const Error& e) {
            score.error = e.what();
        }
    });
    std::vector<std::optional<double>> values;
    for (const auto& s : sel.scores) values.push_back(s.value);
    const auto best = argmin_lowest_index(values);
    if (!best) {
        fail(ErrorKind::selection, "every candidate evaluation failed: " + sel.scores.front().error);
    }
    sel.index = *best;
    sel.query = candidates[*best];
    return sel;
}

}  // namespace

Selection select_query_ip(const std::vector<Query>& candidates, const History& h, const Predictor& predictor,
                          const HypothesisSampler& sampler, std::size_t n_est, SeededRng& rng,
                          const Subject& episode, std::size_t workers) {
    return select_by_objective(candidates, h, predictor, rng, workers, [&](const Query& q, SeededRng& r) {
        const auto est = conditional_entropy_mc(predictor, sampler, q, h, n_est, r, episode);
        return std::pair{est.value, est.std_error};
    });
}

Selection select_query_cip(const std::vector<Query>& candidates, const History& h, const Predictor& predictor,
                           const HypothesisSampler& sampler, const CalibrationTable& table, std::size_t k,
                           std::size_t n_est, SeededRng& rng, const Subject& episode, EmptySetPolicy policy,
                           std::size_t workers) {
    const double tau = table.tau(k + 1);
    return select_by_objective(candidates, h, predictor, rng, workers, [&](const Query& q, SeededRng& r) {
        const auto est = expected_log_set_size(predictor, sampler, q, h, tau, n_est, r, episode, policy);
        return std::pair{est.value, est.std_error};
    });
}

std::optional<Query> select_query_random(const std::vector<Query>& remaining, SeededRng& rng) {
    if (remaining.empty()) return std::nullopt;
    return remaining[rng.index(remaining.size())];
}

Query select_query_dp(const QueryProposer& proposer, const History& h, const Subject& subject) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<Query> proposed;
        try {
            proposed = proposer.propose(h, 1, subject);
        } catch (const Error& e) {
            throw Error(ErrorKind::selection, std::string("proposer failed: ") + e.what());
        }
        if (proposed.empty()) fail(ErrorKind::selection, "proposer returned no query");
        if (!(h.closed_set() && h.contains(proposed.front().id))) return proposed.front();
    }
    fail(ErrorKind::selection, "proposer repeated an already-asked query twice");
}

double sigma_hat(const std::vector<double>& objectives) {
    if (objectives.empty()) fail(ErrorKind::invalid_input, "no objectives");
    // Identical values give exactly 0, whatever rounding the mean picks up.
    if (std::all_of(objectives.begin(), objectives.end(), [&](double c) { return c == objectives.front(); })) {
        return 0.0;
    }
    double mean = 0.0;
    for (double c : objectives) mean += c;
    mean /= static_cast<double>(objectives.size());
    double ss = 0.0;
    for (double c : objectives) ss += (c - mean) * (c - mean);
    return std::sqrt(ss / static_cast<double>(objectives.size()));
}

bool stopping_check(const std::vector<double>& objectives, double epsilon) {
    return sigma_hat(objectives) < epsilon;
}

std::optional<Answer> ParaphrasingAnswerer::answer(const Query& q, SeededRng& rng) {
    auto a = inner_.answer(q, rng);
    if (!a || !hook_) return a;
    return hook_(*a, q, rng);
}

}  // namespace cip
