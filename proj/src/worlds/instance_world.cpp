#include "cip/worlds/instance_world.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

namespace cip {

using nlohmann::ordered_json;

InstanceWorld::InstanceWorld(std::vector<Instance> instances) : instances_(std::move(instances)) {
    std::set<std::string> ids;
    for (const auto& inst : instances_) {
        if (!ids.insert(inst.id).second) fail(ErrorKind::invalid_input, "duplicate instance id '" + inst.id + "'");
        if (inst.answer >= inst.options.size()) fail(ErrorKind::invalid_input, "true option out of range");
        if (inst.queries.size() != inst.fact_answers.size()) fail(ErrorKind::shape, "facts and queries differ");
        std::set<std::string> qids;
        for (const auto& q : inst.queries) {
            if (!qids.insert(q.id).second) fail(ErrorKind::duplicate_query, "duplicate query id '" + q.id + "'");
        }
    }
}

std::vector<AnswerOutcome> InstanceWorld::answer_outcomes(std::size_t subject, const Query& q) const {
    const auto& inst = instances_.at(subject);
    for (std::size_t j = 0; j < inst.queries.size(); ++j) {
        if (inst.queries[j].id == q.id) return {{Answer::free_text(inst.fact_answers[j]), 1.0}};
    }
    for (std::size_t j = 0; j < inst.queries.size(); ++j) {
        if (inst.queries[j].text == q.text) return {{Answer::free_text(inst.fact_answers[j]), 1.0}};
    }
    return {{Answer::free_text(kCannotAnswer), 1.0}};
}

namespace {

std::string require_string(const ordered_json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorKind::parse, std::string("missing field '") + key + "'", line);
    if (!it->is_string()) throw Error(ErrorKind::parse, std::string("field '") + key + "' must be a string", line);
    return it->get<std::string>();
}

std::string optional_string(const ordered_json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) return {};
    if (!it->is_string()) throw Error(ErrorKind::parse, std::string("field '") + key + "' must be a string", line);
    return it->get<std::string>();
}

Instance parse_instance(const std::string& text, std::size_t line) {
    ordered_json obj;
    try {
        obj = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed JSON: ") + e.what(), line);
    }
    if (!obj.is_object()) throw Error(ErrorKind::parse, "line is not a JSON object", line);

    const std::string id = require_string(obj, "id", line);
    const std::string context = require_string(obj, "context", line);
    const std::string answer = require_string(obj, "answer", line);

    auto opts = obj.find("options");
    if (opts == obj.end() || !opts->is_array()) throw Error(ErrorKind::parse, "missing array field 'options'", line);
    std::vector<std::string> options;
    for (const auto& o : *opts) {
        if (!o.is_string()) throw Error(ErrorKind::parse, "options must be strings", line);
        options.push_back(o.get<std::string>());
    }
    auto pos = std::find(options.begin(), options.end(), answer);
    if (pos == options.end()) throw Error(ErrorKind::parse, "answer '" + answer + "' is not among the options", line);

    auto facts = obj.find("facts");
    if (facts == obj.end() || !facts->is_array()) throw Error(ErrorKind::parse, "missing array field 'facts'", line);
    std::vector<Query> queries;
    std::vector<std::string> fact_answers;
    for (const auto& f : *facts) {
        if (!f.is_object()) throw Error(ErrorKind::parse, "facts must be objects", line);
        const std::string q = require_string(f, "question", line);
        const std::string a = require_string(f, "answer", line);
        if (q.empty() || a.empty()) throw Error(ErrorKind::parse, "fact question and answer must be nonempty", line);
        queries.emplace_back(id + "#" + std::to_string(queries.size() + 1), q);
        fact_answers.push_back(a);
    }

    try {
        return Instance{id,
                        context,
                        optional_string(obj, "question", line),
                        optional_string(obj, "specialty", line),
                        LabelSpace(options),
                        static_cast<std::size_t>(pos - options.begin()),
                        std::move(queries),
                        std::move(fact_answers)};
    } catch (const Error& e) {
        throw Error(ErrorKind::parse, e.what(), line);
    }
}

}  // namespace

InstanceWorld parse_instance_jsonl(std::istream& in) {
    std::vector<Instance> instances;
    std::set<std::string> ids;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto inst = parse_instance(text, line);
        if (!ids.insert(inst.id).second) throw Error(ErrorKind::parse, "duplicate instance id '" + inst.id + "'", line);
        instances.push_back(std::move(inst));
    }
    if (instances.empty()) fail(ErrorKind::parse, "no instances in file");
    return InstanceWorld(std::move(instances));
}

InstanceWorld load_instance_world(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    return parse_instance_jsonl(in);
}

std::string to_instance_jsonl(const InstanceWorld& w) {
    std::string out;
    for (const auto& inst : w.instances()) {
        ordered_json obj;
        obj["id"] = inst.id;
        obj["context"] = inst.context;
        if (!inst.question.empty()) obj["question"] = inst.question;
        if (!inst.specialty.empty()) obj["specialty"] = inst.specialty;
        obj["options"] = inst.options.names();
        obj["answer"] = inst.options.name(inst.answer);
        ordered_json facts = ordered_json::array();
        for (std::size_t j = 0; j < inst.queries.size(); ++j) {
            facts.push_back({{"question", inst.queries[j].text}, {"answer", inst.fact_answers[j]}});
        }
        obj["facts"] = std::move(facts);
        out += obj.dump() + "\n";
    }
    return out;
}

InstanceWorld make_synthetic_instance_world(const SyntheticInstanceSpec& spec) {
    static const std::vector<std::string> diagnoses{
        "Influenza",  "Migraine", "Appendicitis", "Community-acquired pneumonia", "Iron deficiency anemia",
        "Asthma exacerbation", "Acute gastritis", "Hypothyroidism"};
    static const std::vector<std::string> findings{
        "fever",         "headache",      "abdominal pain", "productive cough", "fatigue",    "wheezing",
        "nausea",        "weight gain",   "photophobia",    "pale skin",        "chest pain", "cold intolerance"};
    if (spec.options < 2 || spec.options > diagnoses.size()) fail(ErrorKind::invalid_input, "bad option count");
    if (spec.min_facts < 1 || spec.min_facts > spec.max_facts || spec.max_facts > findings.size()) {
        fail(ErrorKind::invalid_input, "bad fact count range");
    }
    SeededRng rng(spec.seed, 0x1a57);
    // P(finding present | diagnosis)
    std::vector<std::vector<double>> present(diagnoses.size(), std::vector<double>(findings.size()));
    for (auto& row : present) {
        for (double& p : row) p = 0.05 + 0.9 * rng.uniform();
    }

    std::vector<Instance> instances;
    for (std::size_t i = 0; i < spec.instances; ++i) {
        const std::size_t dx = rng.index(diagnoses.size());
        std::vector<std::size_t> pool(diagnoses.size());
        for (std::size_t d = 0; d < pool.size(); ++d) pool[d] = d;
        std::vector<std::size_t> chosen{dx};
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(dx));
        while (chosen.size() < spec.options) {
            const std::size_t pick = rng.index(pool.size());
            chosen.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        for (std::size_t a = chosen.size(); a > 1; --a) std::swap(chosen[a - 1], chosen[rng.index(a)]);

        std::vector<std::string> options;
        std::size_t answer = 0;
        for (std::size_t a = 0; a < chosen.size(); ++a) {
            options.push_back(diagnoses[chosen[a]]);
            if (chosen[a] == dx) answer = a;
        }

        std::vector<std::size_t> order(findings.size());
        for (std::size_t f = 0; f < order.size(); ++f) order[f] = f;
        for (std::size_t a = order.size(); a > 1; --a) std::swap(order[a - 1], order[rng.index(a)]);
        const std::size_t n_facts = spec.min_facts + rng.index(spec.max_facts - spec.min_facts + 1);

        Instance inst{"pt" + std::to_string(i + 1),
                      "A " + std::to_string(20 + rng.index(60)) + "-year-old patient presents to the clinic.",
                      "What is the most likely diagnosis?",
                      "internal medicine",
                      LabelSpace(options),
                      answer,
                      {},
                      {}};
        for (std::size_t f = 0; f < n_facts; ++f) {
            const std::size_t fi = order[f];
            inst.queries.emplace_back(inst.id + "#" + std::to_string(f + 1),
                                      "Does the patient report " + findings[fi] + "?");
            inst.fact_answers.push_back(rng.bernoulli(present[dx][fi]) ? "The patient reports " + findings[fi] + "."
                                                                        : "The patient denies " + findings[fi] + ".");
        }
        instances.push_back(std::move(inst));
    }
    return InstanceWorld(std::move(instances));
}

}  // namespace cip
