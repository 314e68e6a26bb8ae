#include <cmath>
#include <fstream>
#include <map>
#include <memory>

#include "cip/core/parallel.hpp"
#include "cip/harness.hpp"
#include "cip/llm_bridge.hpp"
#include "internal.hpp"

namespace cip::harness {

namespace detail {

bool is_attribute(WorldSourceKind k) {
    return k == WorldSourceKind::attribute_csv || k == WorldSourceKind::synthetic_attribute ||
           k == WorldSourceKind::bisection;
}

LoadedWorld load_world(const WorldSource& src) {
    LoadedWorld w;
    switch (src.kind) {
        case WorldSourceKind::attribute_csv:
            w.attr = std::make_unique<AttributeWorld>(load_attribute_world(src.path, src.answer_noise));
            break;
        case WorldSourceKind::synthetic_attribute: {
            SyntheticAttributeSpec spec = src.attribute;
            spec.answer_noise = src.answer_noise;
            w.attr = std::make_unique<AttributeWorld>(make_synthetic_attribute_world(spec));
            break;
        }
        case WorldSourceKind::bisection:
            w.attr = std::make_unique<AttributeWorld>(make_bisection_world(src.bits, src.distractors, src.answer_noise));
            break;
        case WorldSourceKind::instance_jsonl:
            w.inst = std::make_unique<InstanceWorld>(load_instance_world(src.path));
            break;
        case WorldSourceKind::synthetic_instance:
            w.inst = std::make_unique<InstanceWorld>(make_synthetic_instance_world(src.instance));
            break;
    }
    return w;
}

LlmSession::LlmSession(const ExperimentConfig& cfg) {
    llm::EndpointConfig endpoint = cfg.endpoint;
    if (cfg.mock_fixture) {
        server = std::make_unique<llm::MockServer>(llm::Fixture::load(*cfg.mock_fixture));
        server->start();
        endpoint.base_url = server->base_url();
    }
    client = std::make_unique<llm::Client>(endpoint);
}

LlmSession::~LlmSession() {
    if (server) server->stop();
}

GroupOracles build_oracles(const ExperimentConfig& cfg, const LoadedWorld& lw, llm::Client* client,
                           const Split* split) {
    GroupOracles g;
    const World& world = lw.world();
    std::vector<std::size_t> everyone(world.num_subjects());
    for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;
    const std::vector<std::size_t>& est = split ? split->est : everyone;
    const std::vector<std::size_t>& cal = split ? split->cal : everyone;
    g.test = split ? split->test : everyone;

    auto own = [&](std::unique_ptr<Predictor> p) {
        g.predictors.push_back(std::move(p));
        return g.predictors.back().get();
    };
    const Predictor* p = nullptr;
    switch (cfg.predictor.kind) {
        case PredictorKind::exact:
            p = own(std::make_unique<ExactPosteriorPredictor>(*lw.attr));
            break;
        case PredictorKind::miscalibrated: {
            const Predictor* base = lw.attr ? own(std::make_unique<ExactPosteriorPredictor>(*lw.attr))
                                            : own(std::make_unique<NaiveBayesInstancePredictor>(*lw.inst, est));
            p = own(std::make_unique<MiscalibratedPredictor>(*base, MiscalibrationSpec{cfg.predictor.temperature, {}}));
            break;
        }
        case PredictorKind::point_mass:
            p = own(std::make_unique<TruthPointMassPredictor>(world.labels_for(0).size()));
            break;
        case PredictorKind::naive_bayes:
            p = own(std::make_unique<NaiveBayesInstancePredictor>(*lw.inst, est));
            break;
        case PredictorKind::llm:
            if (lw.attr) {
                const LabelSpace& labels = lw.attr->labels();
                if (cfg.predictor.enumerate_labels) {
                    EnumeratedLabels e = enumerate_labels(labels, EnumerationStyle::numbers);
                    p = own(std::make_unique<llm::LlmPredictor>(*client, e.labels, e.tokens));
                } else {
                    TokenMap tokens = TokenMap::leading_word(labels);
                    check_first_tokens(labels, tokens);
                    p = own(std::make_unique<llm::LlmPredictor>(*client, labels, tokens));
                }
                g.proposer = std::make_unique<llm::LlmProposer>(*client, labels);
            } else {
                p = own(std::make_unique<llm::LlmInstancePredictor>(*client, *lw.inst));
            }
            break;
    }
    g.predictor = p;

    if (lw.attr) {
        g.hypotheses = std::make_unique<PosteriorHypothesisSampler>(*lw.attr, p, cfg.hypotheses);
    } else {
        g.hypotheses = std::make_unique<PoolHypothesisSampler>(world, est);
    }
    if (cfg.history_sampler == "dp") {
        if (!g.proposer) fail(ErrorKind::configuration, "no proposer available for the dp history sampler");
        g.histories = std::make_unique<DpHistorySampler>(world, *g.proposer, cal);
    } else if (lw.attr) {
        g.histories = std::make_unique<UniformHistorySampler>(*lw.attr);
    } else {
        g.histories = std::make_unique<UniformHistorySampler>(world, cal);
    }
    if (cfg.episodes && g.test.size() > *cfg.episodes) g.test.resize(*cfg.episodes);
    return g;
}

std::uint64_t episode_stream(std::size_t fold, std::size_t strategy, std::size_t subject) {
    return mix_ids(mix_ids(fold + 1, strategy), subject);
}

std::uint64_t calibration_stream(std::size_t fold) { return mix_ids(fold + 1, 0xCA1B); }

}  // namespace detail

using namespace detail;

namespace {

struct Stats {
    std::optional<double> mean;
    double std = 0.0;
    std::size_t n = 0;
};

Stats summarize(const std::vector<double>& v) {
    Stats s;
    s.n = v.size();
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    const double m = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    s.mean = m;
    s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return s;
}

Curve make_curve(const std::string& name, const std::vector<std::vector<double>>& per_iter) {
    Curve c;
    c.strategy = name;
    for (std::size_t t = 0; t < per_iter.size(); ++t) {
        const Stats s = summarize(per_iter[t]);
        c.points.push_back(CurvePoint{t + 1, s.mean, s.std, s.n});
    }
    return c;
}

// The objective an episode reports at each iteration: the chosen value while
// it runs, carried forward from the stop row afterwards.
std::vector<std::optional<double>> objective_series(const RunRecord& r, std::size_t L) {
    std::vector<std::optional<double>> out(L);
    std::optional<double> last;
    for (std::size_t t = 1; t <= L; ++t) {
        if (t <= r.rows.size()) {
            last = r.rows[t - 1].chosen_objective;
            out[t - 1] = last;
        } else if (r.stop_iteration && last) {
            out[t - 1] = last;
        }
    }
    return out;
}

}  // namespace

std::string table_key(const std::string& strategy, std::size_t fold, std::uint64_t seed) {
    return strategy + "/f" + std::to_string(fold) + "/s" + std::to_string(seed);
}

CurveSet aggregate_curves(const std::vector<RunRecord>& records, const std::vector<std::string>& order,
                          const std::map<std::string, CalibrationTable>& tables, std::size_t L) {
    CurveSet curves;
    curves.max_iters = L;
    for (const auto& name : order) {
        // Groups in order of first appearance.
        std::vector<std::pair<std::size_t, std::uint64_t>> groups;
        std::map<std::pair<std::size_t, std::uint64_t>, std::vector<RunRecord>> members;
        for (const auto& r : records) {
            if (r.strategy != name) continue;
            const auto key = std::make_pair(r.fold, r.seed);
            if (!members.count(key)) groups.push_back(key);
            members[key].push_back(r);
        }
        std::vector<std::vector<double>> acc(L), cov(L), obj(L), thr(L);
        bool has_table = false;
        for (const auto& key : groups) {
            const auto& recs = members[key];
            std::vector<double> acc_sum(L, 0.0);
            std::size_t acc_n = 0;
            for (const auto& r : recs) {
                if (r.accuracy && r.accuracy->size() >= L) {
                    for (std::size_t t = 0; t < L; ++t) acc_sum[t] += (*r.accuracy)[t];
                    ++acc_n;
                }
                const auto series = objective_series(r, L);
                for (std::size_t t = 0; t < L; ++t) {
                    if (series[t]) obj[t].push_back(*series[t]);
                }
            }
            if (acc_n > 0) {
                for (std::size_t t = 0; t < L; ++t) acc[t].push_back(acc_sum[t] / static_cast<double>(acc_n));
            }
            const auto it = tables.find(table_key(name, key.first, key.second));
            if (it == tables.end()) continue;
            has_table = true;
            const CalibrationTable& table = it->second;
            const auto c = coverage_for_group(recs, table, key.second, key.first);
            for (std::size_t t = 0; t < L && t < table.max_length(); ++t) {
                if (c[t]) cov[t].push_back(*c[t]);
                const double tau = table.tau(t + 1);
                if (std::isfinite(tau)) thr[t].push_back(tau);
            }
        }
        curves.accuracy.push_back(make_curve(name, acc));
        curves.objective.push_back(make_curve(name, obj));
        if (has_table) {
            curves.coverage.push_back(make_curve(name, cov));
            curves.thresholds.push_back(make_curve(name, thr));
        }
    }
    return curves;
}

std::vector<std::optional<double>> coverage_for_group(const std::vector<RunRecord>& records,
                                                      const CalibrationTable& table, std::uint64_t seed,
                                                      std::size_t fold) {
    std::vector<CoverageTrace> traces;
    for (const auto& r : records) {
        if (!r.true_label || r.status == "error") continue;
        traces.push_back(trace_from_record(r));
    }
    SeededRng rng(seed, mix_ids(fold + 1, 0xC0FE));
    return coverage_from_traces(traces, table, table.jitter().enabled ? &rng : nullptr);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<StrategyConfig> strategies = cfg.expanded_strategies();
    const std::size_t L = cfg.max_iters;
    ExperimentResult result;
    result.curves.max_iters = L;

    LoadedWorld lw;
    try {
        lw = load_world(cfg.world);
    } catch (const Error& e) {
        result.errors.push_back(ErrorEntry{"world", "", std::nullopt, std::nullopt, "", std::string(to_string(e.kind())), e.what()});
        return result;
    }
    const World& world = lw.world();
    std::unique_ptr<LlmSession> session;
    if (cfg.predictor.kind == PredictorKind::llm) session = std::make_unique<LlmSession>(cfg);
    llm::Client* client = session ? session->client.get() : nullptr;

    const std::size_t S = strategies.size();

    for (std::size_t fold = 0; fold < cfg.folds; ++fold) {
        for (std::uint64_t seed : cfg.seeds) {
            std::optional<Split> split;
            GroupOracles g;
            try {
                if (lw.inst) split = rotate(split_three_way(world.num_subjects(), seed), fold);
                g = build_oracles(cfg, lw, client, split ? &*split : nullptr);
            } catch (const Error& e) {
                result.errors.push_back(ErrorEntry{"world", "", fold, seed, "", std::string(to_string(e.kind())), e.what()});
                continue;
            }
            const std::size_t workers = g.predictor->concurrent_safe() ? cfg.workers : 1;

            // One set of calibration scores serves every alpha.
            std::vector<std::optional<CalibrationTable>> tables(S);
            bool any_cip = false;
            for (const auto& s : strategies) any_cip = any_cip || s.kind == StrategyKind::cip;
            if (any_cip) {
                try {
                    SeededRng crng(seed, calibration_stream(fold));
                    const auto scores =
                        calibration_scores(*g.histories, *g.predictor, L, cfg.n_cal, crng, cfg.jitter, workers);
                    for (std::size_t si = 0; si < S; ++si) {
                        if (strategies[si].kind != StrategyKind::cip) continue;
                        tables[si] = table_from_scores(scores, *strategies[si].alpha, g.histories->kind(), cfg.jitter);
                        result.tables.insert_or_assign(table_key(strategies[si].display_name(), fold, seed), *tables[si]);
                    }
                } catch (const Error& e) {
                    for (const auto& s : strategies) {
                        if (s.kind != StrategyKind::cip) continue;
                        result.errors.push_back(ErrorEntry{"calibration", s.display_name(), fold, seed, "", std::string(to_string(e.kind())), e.what()});
                    }
                }
            }

            struct Job {
                std::size_t strategy;
                std::size_t subject;
            };
            std::vector<Job> jobs;
            for (std::size_t si = 0; si < S; ++si) {
                if (strategies[si].kind == StrategyKind::cip && !tables[si]) continue;
                for (std::size_t subj : g.test) jobs.push_back({si, subj});
            }
            std::vector<RunRecord> out(jobs.size());
            parallel_for(jobs.size(), workers, [&](std::size_t j) {
                const Job& job = jobs[j];
                const StrategyConfig& sc = strategies[job.strategy];
                EpisodeSetup setup{&world, job.subject, world.true_label(job.subject), world.subject_id(job.subject)};
                std::unique_ptr<Answerer> answerer;
                if (client && (sc.kind == StrategyKind::dp || sc.query_set == QuerySetMode::open)) {
                    const std::string label = world.labels_for(job.subject).name(world.true_label(job.subject));
                    answerer = std::make_unique<llm::LlmAnswerer>(
                        *client, lw.attr ? llm::AnswerRole::binary : llm::AnswerRole::free_text, label);
                } else {
                    answerer = std::make_unique<WorldAnswerer>(world, job.subject);
                }
                EpisodeOracles oracles{g.predictor, g.hypotheses.get(), g.proposer.get(),
                                       tables[job.strategy] ? &*tables[job.strategy] : nullptr, answerer.get()};
                SeededRng rng(seed, episode_stream(fold, job.strategy, job.subject));
                try {
                    out[j] = run_episode(sc, setup, oracles, rng);
                } catch (const Error& e) {
                    RunRecord r;
                    r.strategy = sc.display_name();
                    r.instance_id = setup.instance_id;
                    r.true_label = setup.true_label;
                    r.seed = rng.seed();
                    r.stream = rng.stream();
                    r.status = "error";
                    r.error = std::string(to_string(e.kind())) + ": " + e.what();
                    out[j] = std::move(r);
                }
            });

            for (std::size_t j = 0; j < jobs.size(); ++j) {
                RunRecord& r = out[j];
                r.fold = fold;
                if (r.status == "error") {
                    const std::string msg = r.error.value_or("");
                    const auto colon = msg.find(": ");
                    result.errors.push_back(ErrorEntry{"episode", r.strategy, fold, seed, r.instance_id,
                                             colon == std::string::npos ? "episode" : msg.substr(0, colon),
                                             colon == std::string::npos ? msg : msg.substr(colon + 2)});
                }
                result.records.push_back(std::move(r));
            }
        }
    }

    std::vector<std::string> order;
    for (const auto& s : strategies) order.push_back(s.display_name());
    result.curves = aggregate_curves(result.records, order, result.tables, L);
    if (session && session->server && cfg.mock_fixture) {
        result.mock_recording = session->server->recorded().to_json();
    }
    return result;
}

CalibrationTable calibrate(const ExperimentConfig& cfg, double alpha, std::uint64_t seed) {
    cfg.validate();
    LoadedWorld lw = load_world(cfg.world);
    std::unique_ptr<LlmSession> session;
    if (cfg.predictor.kind == PredictorKind::llm) session = std::make_unique<LlmSession>(cfg);
    std::optional<Split> split;
    if (lw.inst) split = split_three_way(lw.world().num_subjects(), seed);
    GroupOracles g = build_oracles(cfg, lw, session ? session->client.get() : nullptr, split ? &*split : nullptr);
    SeededRng rng(seed, calibration_stream(0));
    const std::size_t workers = g.predictor->concurrent_safe() ? cfg.workers : 1;
    return calibrate_lengths(*g.histories, *g.predictor, alpha, cfg.max_iters, cfg.n_cal, rng, cfg.jitter, workers);
}

std::vector<double> holdout_coverage(const ExperimentConfig& cfg, const CalibrationTable& table, std::uint64_t seed,
                                     std::size_t n_test) {
    cfg.validate();
    LoadedWorld lw = load_world(cfg.world);
    std::unique_ptr<LlmSession> session;
    if (cfg.predictor.kind == PredictorKind::llm) session = std::make_unique<LlmSession>(cfg);
    std::optional<Split> split;
    if (lw.inst) {
        // Test histories come from the test part of the split.
        split = split_three_way(lw.world().num_subjects(), seed);
        split->cal = split->test;
    }
    GroupOracles g = build_oracles(cfg, lw, session ? session->client.get() : nullptr, split ? &*split : nullptr);
    SeededRng rng(seed, mix_ids(0x7E57, 1));
    const std::size_t workers = g.predictor->concurrent_safe() ? cfg.workers : 1;
    const auto scores =
        calibration_scores(*g.histories, *g.predictor, table.max_length(), n_test, rng, table.jitter(), workers);
    std::vector<double> out;
    for (std::size_t k = 1; k <= table.max_length(); ++k) {
        std::size_t hit = 0;
        for (double s : scores[k - 1]) hit += s >= table.tau(k) ? 1 : 0;
        out.push_back(static_cast<double>(hit) / static_cast<double>(n_test));
    }
    return out;
}

}  // namespace cip::harness
