#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cip/harness.hpp"

namespace cip::harness {

using nlohmann::json;

namespace {

WorldSourceKind parse_world_kind(const std::string& s) {
    if (s == "attribute_csv") return WorldSourceKind::attribute_csv;
    if (s == "instance_jsonl") return WorldSourceKind::instance_jsonl;
    if (s == "synthetic_attribute") return WorldSourceKind::synthetic_attribute;
    if (s == "synthetic_instance") return WorldSourceKind::synthetic_instance;
    if (s == "bisection") return WorldSourceKind::bisection;
    fail(ErrorKind::configuration, "unknown world source '" + s + "'");
}

PredictorKind parse_predictor_kind(const std::string& s) {
    if (s == "exact") return PredictorKind::exact;
    if (s == "miscalibrated") return PredictorKind::miscalibrated;
    if (s == "point_mass") return PredictorKind::point_mass;
    if (s == "naive_bayes") return PredictorKind::naive_bayes;
    if (s == "llm") return PredictorKind::llm;
    fail(ErrorKind::configuration, "unknown predictor kind '" + s + "'");
}

HypothesisMode parse_hypothesis_mode(const std::string& s) {
    if (s == "predictor_posterior") return HypothesisMode::predictor_posterior;
    if (s == "exact_posterior") return HypothesisMode::exact_posterior;
    if (s == "uniform_consistent") return HypothesisMode::uniform_consistent;
    if (s == "exhaustive") return HypothesisMode::exhaustive;
    fail(ErrorKind::configuration, "unknown hypothesis mode '" + s + "'");
}

EmptySetPolicy parse_policy(const std::string& s) {
    if (s == "count_as_full") return EmptySetPolicy::count_as_full;
    if (s == "clamp") return EmptySetPolicy::clamp;
    fail(ErrorKind::configuration, "unknown empty-set policy '" + s + "'");
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) fail(ErrorKind::configuration, "unknown key '" + key + "' in " + where);
    }
}

// Fields that may appear both at top level and inside a strategy entry.
void read_strategy_fields(const json& j, StrategyConfig& s) {
    if (j.contains("n_est")) s.n_est = j.at("n_est").get<std::size_t>();
    if (j.contains("epsilon")) s.epsilon = j.at("epsilon").get<double>();
    if (j.contains("m")) s.m = j.at("m").get<std::size_t>();
    if (j.contains("accuracy_rule")) s.accuracy_rule = parse_accuracy_rule(j.at("accuracy_rule").get<std::string>());
    if (j.contains("empty_set_policy")) s.empty_set_policy = parse_policy(j.at("empty_set_policy").get<std::string>());
    if (j.contains("query_set")) {
        const auto qs = j.at("query_set").get<std::string>();
        if (qs == "closed") s.query_set = QuerySetMode::closed;
        else if (qs == "open") s.query_set = QuerySetMode::open;
        else fail(ErrorKind::configuration, "unknown query_set '" + qs + "'");
    }
}

void read_endpoint(const json& j, llm::EndpointConfig& e) {
    check_keys(j, {"base_url", "model", "api_key_env", "temperature", "max_new_tokens", "do_sample", "top_logprobs",
                   "timeout_seconds", "max_retries", "max_in_flight", "backoff_initial_ms", "backoff_max_ms",
                   "label_position"},
               "endpoint");
    e.base_url = j.value("base_url", e.base_url);
    e.model = j.value("model", e.model);
    e.api_key_env = j.value("api_key_env", e.api_key_env);
    e.temperature = j.value("temperature", e.temperature);
    e.max_new_tokens = j.value("max_new_tokens", e.max_new_tokens);
    e.do_sample = j.value("do_sample", e.do_sample);
    e.top_logprobs = j.value("top_logprobs", e.top_logprobs);
    e.timeout_seconds = j.value("timeout_seconds", e.timeout_seconds);
    e.max_retries = j.value("max_retries", e.max_retries);
    e.max_in_flight = j.value("max_in_flight", e.max_in_flight);
    e.backoff_initial_ms = j.value("backoff_initial_ms", e.backoff_initial_ms);
    e.backoff_max_ms = j.value("backoff_max_ms", e.backoff_max_ms);
    e.label_position = j.value("label_position", e.label_position);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) fail(ErrorKind::configuration, "config must be a JSON object");
        check_keys(j,
                   {"world", "predictor", "hypotheses", "history_sampler", "strategies", "alphas", "max_iters", "N",
                    "n_est", "epsilon", "m", "accuracy_rule", "empty_set_policy", "query_set", "seeds", "folds",
                    "episodes", "jitter", "output_dir", "workers", "svg", "endpoint", "mock_fixture"},
                   "config");

        if (j.contains("world")) {
            const json& w = j.at("world");
            check_keys(w, {"source", "path", "answer_noise", "classes", "queries", "seed", "instances", "options",
                           "min_facts", "max_facts", "bits", "distractors"},
                       "world");
            auto& ws = cfg.world;
            ws.kind = parse_world_kind(w.value("source", std::string("synthetic_attribute")));
            if (w.contains("path")) ws.path = w.at("path").get<std::string>();
            ws.answer_noise = w.value("answer_noise", 0.0);
            ws.attribute.answer_noise = ws.answer_noise;
            ws.attribute.classes = w.value("classes", ws.attribute.classes);
            ws.attribute.queries = w.value("queries", ws.attribute.queries);
            ws.attribute.seed = w.value("seed", ws.attribute.seed);
            ws.instance.instances = w.value("instances", ws.instance.instances);
            ws.instance.options = w.value("options", ws.instance.options);
            ws.instance.min_facts = w.value("min_facts", ws.instance.min_facts);
            ws.instance.max_facts = w.value("max_facts", ws.instance.max_facts);
            ws.instance.seed = w.value("seed", ws.instance.seed);
            ws.bits = w.value("bits", ws.bits);
            ws.distractors = w.value("distractors", ws.distractors);
        }
        if (j.contains("predictor")) {
            const json& p = j.at("predictor");
            check_keys(p, {"kind", "temperature", "enumerate_labels"}, "predictor");
            cfg.predictor.kind = parse_predictor_kind(p.value("kind", std::string("exact")));
            cfg.predictor.temperature = p.value("temperature", 1.0);
            cfg.predictor.enumerate_labels = p.value("enumerate_labels", false);
        }
        if (j.contains("hypotheses")) cfg.hypotheses = parse_hypothesis_mode(j.at("hypotheses").get<std::string>());
        cfg.history_sampler = j.value("history_sampler", cfg.history_sampler);
        if (j.contains("alphas")) cfg.alphas = j.at("alphas").get<std::vector<double>>();
        cfg.max_iters = j.value("max_iters", cfg.max_iters);
        cfg.n_cal = j.value("N", cfg.n_cal);
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.folds = j.value("folds", cfg.folds);
        if (j.contains("episodes") && !j.at("episodes").is_null()) cfg.episodes = j.at("episodes").get<std::size_t>();
        if (j.contains("jitter")) {
            const json& jt = j.at("jitter");
            check_keys(jt, {"enabled", "magnitude"}, "jitter");
            cfg.jitter.enabled = jt.value("enabled", cfg.jitter.enabled);
            cfg.jitter.magnitude = jt.value("magnitude", cfg.jitter.magnitude);
        }
        if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
        cfg.workers = j.value("workers", cfg.workers);
        cfg.svg = j.value("svg", cfg.svg);
        if (j.contains("endpoint")) read_endpoint(j.at("endpoint"), cfg.endpoint);
        if (j.contains("mock_fixture") && !j.at("mock_fixture").is_null()) {
            cfg.mock_fixture = j.at("mock_fixture").get<std::string>();
        }

        StrategyConfig defaults;
        read_strategy_fields(j, defaults);
        if (j.contains("strategies")) {
            for (const json& s : j.at("strategies")) {
                StrategyConfig sc = defaults;
                if (s.is_string()) {
                    sc.kind = parse_strategy_kind(s.get<std::string>());
                } else {
                    check_keys(s, {"kind", "name", "alpha", "n_est", "epsilon", "m", "accuracy_rule",
                                   "empty_set_policy", "query_set"},
                               "strategy");
                    sc.kind = parse_strategy_kind(s.at("kind").get<std::string>());
                    sc.name = s.value("name", std::string());
                    if (s.contains("alpha")) sc.alpha = s.at("alpha").get<double>();
                    read_strategy_fields(s, sc);
                }
                cfg.strategies.push_back(std::move(sc));
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::configuration, std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
    if (strategies.empty()) fail(ErrorKind::configuration, "at least one strategy is required");
    if (seeds.empty()) fail(ErrorKind::configuration, "seeds must be nonempty");
    if (folds < 1) fail(ErrorKind::configuration, "folds must be at least 1");
    if (folds > 3) fail(ErrorKind::configuration, "at most 3 folds (rotations of the three-way split)");
    const bool attribute = world.kind == WorldSourceKind::attribute_csv ||
                           world.kind == WorldSourceKind::synthetic_attribute ||
                           world.kind == WorldSourceKind::bisection;
    if (attribute && folds != 1) fail(ErrorKind::configuration, "attribute worlds use a single fold");
    if (max_iters < 1) fail(ErrorKind::configuration, "max_iters must be at least 1");
    if (n_cal < 1) fail(ErrorKind::configuration, "N must be at least 1");
    if (workers < 1) fail(ErrorKind::configuration, "workers must be at least 1");
    if (history_sampler != "uniform" && history_sampler != "dp") {
        fail(ErrorKind::configuration, "history_sampler must be uniform or dp");
    }
    if (history_sampler == "dp" && predictor.kind != PredictorKind::llm) {
        fail(ErrorKind::configuration, "the dp history sampler needs the llm predictor");
    }
    if ((world.kind == WorldSourceKind::attribute_csv || world.kind == WorldSourceKind::instance_jsonl) &&
        world.path.empty()) {
        fail(ErrorKind::configuration, "world.path is required for file sources");
    }
    if (attribute && predictor.kind == PredictorKind::naive_bayes) {
        fail(ErrorKind::configuration, "naive_bayes is for instance worlds");
    }
    if (!attribute && predictor.kind == PredictorKind::exact) {
        fail(ErrorKind::configuration, "the exact predictor needs an attribute world");
    }
    if (!(predictor.temperature > 0.0)) fail(ErrorKind::configuration, "temperature must be positive");
    if (!(jitter.magnitude > 0.0)) fail(ErrorKind::configuration, "jitter magnitude must be positive");
    bool needs_alpha = false;
    for (const auto& s : strategies) {
        s.validate();
        if (s.kind == StrategyKind::cip && !s.alpha) needs_alpha = true;
        if ((s.kind == StrategyKind::dp || s.query_set == QuerySetMode::open) && predictor.kind != PredictorKind::llm) {
            fail(ErrorKind::configuration, "dp and open-set strategies need the llm predictor");
        }
    }
    if (needs_alpha && alphas.empty()) fail(ErrorKind::configuration, "cip strategies need alphas");
    for (double a : alphas) {
        if (!(a > 0.0 && a < 0.5)) fail(ErrorKind::configuration, "alphas must lie in (0, 0.5)");
    }
    if (predictor.kind == PredictorKind::llm) endpoint.validate();
}

std::vector<StrategyConfig> ExperimentConfig::expanded_strategies() const {
    std::vector<StrategyConfig> out;
    for (const auto& s : strategies) {
        if (s.kind == StrategyKind::cip && !s.alpha) {
            for (double a : alphas) {
                StrategyConfig c = s;
                c.alpha = a;
                c.max_iters = max_iters;
                out.push_back(c);
            }
        } else {
            StrategyConfig c = s;
            c.max_iters = max_iters;
            out.push_back(c);
        }
    }
    std::set<std::string> names;
    for (const auto& s : out) {
        if (!names.insert(s.display_name()).second) {
            fail(ErrorKind::configuration, "duplicate strategy name '" + s.display_name() + "'");
        }
    }
    return out;
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.seeds = {*o.seed};
    if (o.alphas) cfg.alphas = *o.alphas;
    if (o.strategies) {
        StrategyConfig base = cfg.strategies.empty() ? StrategyConfig{} : cfg.strategies.front();
        base.alpha.reset();
        base.name.clear();
        cfg.strategies.clear();
        for (const auto& k : *o.strategies) {
            StrategyConfig s = base;
            s.kind = parse_strategy_kind(k);
            cfg.strategies.push_back(s);
        }
    }
    if (o.n_est) {
        for (auto& s : cfg.strategies) s.n_est = *o.n_est;
    }
    if (o.max_iters) cfg.max_iters = *o.max_iters;
    if (o.out) cfg.output_dir = *o.out;
    if (o.workers) cfg.workers = *o.workers;
    if (o.endpoint) cfg.endpoint.base_url = *o.endpoint;
    if (o.mock_fixture) cfg.mock_fixture = *o.mock_fixture;
    cfg.validate();
}

}  // namespace cip::harness
