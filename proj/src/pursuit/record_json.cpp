#include <json.hpp>

#include "cip/pursuit.hpp"

namespace cip {

using nlohmann::ordered_json;

namespace {

template <class T>
ordered_json opt(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json query_json(const Query& q) {
    return {{"id", q.id}, {"text", q.text}, {"origin", q.origin == QueryOrigin::closed_set ? "closed-set" : "proposed"}};
}

Query query_from(const ordered_json& j) {
    const auto origin = j.at("origin").get<std::string>();
    return Query(j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                 origin == "proposed" ? QueryOrigin::proposed : QueryOrigin::closed_set);
}

ordered_json answer_json(const Answer& a) {
    return {{"kind", a.kind() == AnswerKind::binary ? "binary" : "free-text"}, {"value", a.value()}};
}

Answer answer_from(const ordered_json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const auto value = j.at("value").get<std::string>();
    if (kind == "binary") {
        if (value != "yes" && value != "no") fail(ErrorKind::parse, "binary answer must be yes or no");
        return Answer::binary(value == "yes");
    }
    return Answer::free_text(value);
}

template <class T>
std::optional<T> opt_from(const ordered_json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<T>();
}

}  // namespace

std::string record_to_json(const RunRecord& r) {
    ordered_json j;
    j["strategy"] = r.strategy;
    j["instance"] = r.instance_id;
    j["true_label"] = opt(r.true_label);
    j["true_label_name"] = opt(r.true_label_name);
    j["human_held"] = r.human_held;
    j["seed"] = r.seed;
    j["stream"] = r.stream;
    j["fold"] = r.fold;
    j["status"] = r.status;
    j["error"] = opt(r.error);
    j["stop_iteration"] = opt(r.stop_iteration);
    j["initial_posterior"] = r.initial_posterior;
    j["initial_prediction"] = r.initial_prediction;
    auto& rows = j["rows"] = ordered_json::array();
    for (const auto& row : r.rows) {
        ordered_json o;
        o["iteration"] = row.iteration;
        o["candidates"] = row.candidates;
        auto& objs = o["objectives"] = ordered_json::array();
        for (const auto& v : row.objectives) objs.push_back(opt(v));
        o["std_errors"] = row.std_errors;
        o["sigma"] = opt(row.sigma);
        o["chosen_objective"] = opt(row.chosen_objective);
        o["query"] = row.query ? query_json(*row.query) : ordered_json(nullptr);
        o["answer"] = row.answer ? answer_json(*row.answer) : ordered_json(nullptr);
        o["history_length"] = row.history_length;
        o["posterior"] = row.posterior;
        o["prediction"] = row.prediction;
        o["correct"] = opt(row.correct);
        o["set_size"] = opt(row.set_size);
        o["stopped"] = row.stopped;
        rows.push_back(std::move(o));
    }
    j["accuracy"] = r.accuracy ? ordered_json(*r.accuracy) : ordered_json(nullptr);
    return j.dump();
}

RunRecord record_from_json(const std::string& line) {
    try {
        const auto j = ordered_json::parse(line);
        RunRecord r;
        r.strategy = j.at("strategy").get<std::string>();
        r.instance_id = j.at("instance").get<std::string>();
        r.true_label = opt_from<std::size_t>(j, "true_label");
        r.true_label_name = opt_from<std::string>(j, "true_label_name");
        r.human_held = j.at("human_held").get<bool>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.stream = j.at("stream").get<std::uint64_t>();
        r.fold = j.value("fold", std::size_t{0});
        r.status = j.at("status").get<std::string>();
        r.error = opt_from<std::string>(j, "error");
        r.stop_iteration = opt_from<std::size_t>(j, "stop_iteration");
        r.initial_posterior = j.at("initial_posterior").get<std::vector<double>>();
        r.initial_prediction = j.at("initial_prediction").get<std::size_t>();
        for (const auto& o : j.at("rows")) {
            RunRow row;
            row.iteration = o.at("iteration").get<std::size_t>();
            row.candidates = o.at("candidates").get<std::vector<std::string>>();
            for (const auto& v : o.at("objectives")) {
                row.objectives.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
            }
            row.std_errors = o.at("std_errors").get<std::vector<double>>();
            row.sigma = opt_from<double>(o, "sigma");
            row.chosen_objective = opt_from<double>(o, "chosen_objective");
            if (!o.at("query").is_null()) row.query = query_from(o.at("query"));
            if (!o.at("answer").is_null()) row.answer = answer_from(o.at("answer"));
            row.history_length = o.at("history_length").get<std::size_t>();
            row.posterior = o.at("posterior").get<std::vector<double>>();
            row.prediction = o.at("prediction").get<std::size_t>();
            row.correct = opt_from<bool>(o, "correct");
            row.set_size = opt_from<std::size_t>(o, "set_size");
            row.stopped = o.at("stopped").get<bool>();
            r.rows.push_back(std::move(row));
        }
        if (!j.at("accuracy").is_null()) r.accuracy = j.at("accuracy").get<std::vector<int>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("run record: ") + e.what());
    }
}

}  // namespace cip
