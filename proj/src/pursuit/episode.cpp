#include <algorithm>

#include "cip/pursuit.hpp"

namespace cip {

namespace {

std::vector<Query> remaining_candidates(const World& world, std::size_t subject, const History& h) {
    std::vector<Query> out;
    for (const auto& q : world.queries_for(subject)) {
        if (!h.contains(q.id)) out.push_back(q);
    }
    return out;
}

std::vector<Query> open_candidates(const QueryProposer& proposer, const History& h, std::size_t m,
                                   const Subject& subject) {
    std::vector<Query> proposed = proposer.propose(h, m, subject);
    if (proposed.empty()) fail(ErrorKind::proposal, "proposer returned no queries");
    return proposed;
}

}  // namespace

std::vector<int> accuracy_curve(const RunRecord& record, AccuracyRule rule, std::size_t max_iters) {
    std::vector<int> acc(max_iters, 0);
    if (!record.true_label) return acc;
    const std::size_t truth = *record.true_label;
    Distribution initial(record.initial_posterior);
    int last = initial.unique_argmax_is(truth) ? 1 : 0;
    int best = last;
    for (std::size_t i = 0; i < max_iters; ++i) {
        if (i < record.rows.size()) {
            const auto& row = record.rows[i];
            last = row.correct.value_or(false) ? 1 : 0;
            best = std::max(best, last);
        }
        acc[i] = rule == AccuracyRule::carry_after_correct ? best : last;
    }
    return acc;
}

RunRecord run_episode(const StrategyConfig& cfg, const EpisodeSetup& setup, const EpisodeOracles& oracles,
                      SeededRng& rng, const EpisodeOptions& options) {
    cfg.validate();
    if (oracles.predictor == nullptr || oracles.answerer == nullptr) {
        fail(ErrorKind::configuration, "episode needs a predictor and an answerer");
    }
    const bool open = cfg.query_set == QuerySetMode::open;
    if ((cfg.kind == StrategyKind::ip || cfg.kind == StrategyKind::cip) && oracles.sampler == nullptr) {
        fail(ErrorKind::configuration, to_string(cfg.kind) + " needs a hypothesis sampler");
    }
    if (cfg.kind == StrategyKind::cip && oracles.table == nullptr) {
        fail(ErrorKind::configuration, "cip needs a calibration table");
    }
    if ((cfg.kind == StrategyKind::dp || open) && oracles.proposer == nullptr) {
        fail(ErrorKind::configuration, "dp and open-set modes need a proposer");
    }
    if (!open && setup.world == nullptr) fail(ErrorKind::configuration, "closed-set mode needs a world");

    RunRecord rec;
    rec.strategy = cfg.display_name();
    rec.instance_id = setup.instance_id;
    rec.true_label = setup.true_label;
    rec.human_held = !setup.true_label.has_value();
    if (setup.true_label && setup.world) rec.true_label_name = setup.world->labels_for(setup.subject).name(*setup.true_label);
    rec.seed = rng.seed();
    rec.stream = rng.stream();

    const Subject subject{setup.subject, setup.true_label.value_or(0)};
    SeededRng select_rng = rng.fork(1);
    SeededRng answer_rng = rng.fork(2);
    const Predictor& predictor = *oracles.predictor;

    History h(!open);
    Distribution posterior = predictor.predict(h, subject);
    rec.initial_posterior = posterior.probs();
    rec.initial_prediction = posterior.argmax();
    rec.status = "complete";

    auto correct_of = [&](const Distribution& d) -> std::optional<bool> {
        if (!setup.true_label) return std::nullopt;
        return d.unique_argmax_is(*setup.true_label);
    };

    try {
        for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
            RunRow row;
            row.iteration = k;
            SeededRng step_rng = select_rng.fork(k);

            std::vector<Query> candidates = open ? open_candidates(*oracles.proposer, h, cfg.m, subject)
                                                 : remaining_candidates(*setup.world, setup.subject, h);
            if (candidates.empty()) {
                rec.status = "exhausted";
                break;
            }

            std::optional<Query> chosen;
            switch (cfg.kind) {
                case StrategyKind::ip:
                case StrategyKind::cip: {
                    Selection sel =
                        cfg.kind == StrategyKind::ip
                            ? select_query_ip(candidates, h, predictor, *oracles.sampler, cfg.n_est, step_rng, subject,
                                              options.workers)
                            : select_query_cip(candidates, h, predictor, *oracles.sampler, *oracles.table, h.size(),
                                               cfg.n_est, step_rng, subject, cfg.empty_set_policy, options.workers);
                    std::vector<double> valid;
                    for (const auto& s : sel.scores) {
                        row.candidates.push_back(s.query.id);
                        row.objectives.push_back(s.value);
                        row.std_errors.push_back(s.std_error);
                        if (s.value) valid.push_back(*s.value);
                    }
                    row.chosen_objective = sel.scores[sel.index].value;
                    row.sigma = sigma_hat(valid);
                    if (*row.sigma < cfg.epsilon) row.stopped = true;
                    chosen = sel.query;
                    break;
                }
                case StrategyKind::random:
                    chosen = select_query_random(candidates, step_rng);
                    break;
                case StrategyKind::dp:
                    chosen = select_query_dp(*oracles.proposer, h, subject);
                    break;
            }

            if (!row.stopped) {
                std::optional<Answer> a = oracles.answerer->answer(*chosen, answer_rng);
                if (!a) {
                    rec.status = "user-terminated";
                    break;
                }
                h = h.extend(*chosen, *a);
                posterior = predictor.predict(h, subject);
                row.query = chosen;
                row.answer = a;
            }

            row.history_length = h.size();
            row.posterior = posterior.probs();
            row.prediction = posterior.argmax();
            row.correct = correct_of(posterior);
            if (oracles.table && h.size() >= 1 && h.size() <= oracles.table->max_length()) {
                row.set_size = prediction_set_size(posterior, oracles.table->tau(h.size()));
            }
            rec.rows.push_back(row);
            if (options.on_row) options.on_row(rec.rows.back());
            if (row.stopped) {
                rec.stop_iteration = k;
                rec.status = "stopped";
                break;
            }
        }
    } catch (const Error& e) {
        rec.status = "error";
        rec.error = std::string(to_string(e.kind())) + ": " + e.what();
    }

    if (setup.true_label) rec.accuracy = accuracy_curve(rec, cfg.accuracy_rule, cfg.max_iters);
    return rec;
}

CoverageTrace trace_from_record(const RunRecord& record) {
    if (!record.true_label) fail(ErrorKind::invalid_input, "coverage needs a known true label");
    CoverageTrace t;
    t.true_label = *record.true_label;
    t.stopped = record.stop_iteration.has_value();
    if (!record.initial_posterior.empty()) t.initial = Distribution(record.initial_posterior);
    for (const auto& row : record.rows) {
        if (row.query) t.posteriors.emplace_back(row.posterior);
    }
    return t;
}

}  // namespace cip
