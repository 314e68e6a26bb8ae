#include "cip/worlds/predictors.hpp"

#include <algorithm>
#include <cmath>

namespace cip {

Distribution miscalibrate(const Distribution& d, const MiscalibrationSpec& spec) {
    if (!(spec.temperature > 0.0) || !std::isfinite(spec.temperature)) {
        fail(ErrorKind::invalid_input, "temperature must be finite and positive");
    }
    if (!spec.bias.empty() && spec.bias.size() != d.size()) fail(ErrorKind::shape, "bias length mismatch");
    std::vector<double> logits(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        logits[i] = std::log(std::max(d[i], kProbabilityFloor)) / spec.temperature;
        if (!spec.bias.empty()) logits[i] += spec.bias[i];
    }
    if (spec.temperature == 1.0 && spec.bias.empty()) return d;
    return softmax(logits);
}

NaiveBayesInstancePredictor::NaiveBayesInstancePredictor(const InstanceWorld& world,
                                                         const std::vector<std::size_t>& training)
    : world_(world) {
    for (std::size_t i : training) {
        const auto& inst = world.instance(i);
        const std::string& y = inst.options.name(inst.answer);
        class_count_[y] += 1.0;
        n_train_ += 1.0;
        for (std::size_t j = 0; j < inst.queries.size(); ++j) {
            counts_[inst.queries[j].text][inst.fact_answers[j]][y] += 1.0;
            totals_[inst.queries[j].text][y] += 1.0;
        }
    }
}

Distribution NaiveBayesInstancePredictor::predict(const History& h, const Subject& s) const {
    const auto& options = world_.instance(s.instance).options;
    std::vector<double> logits(options.size(), 0.0);
    for (std::size_t o = 0; o < options.size(); ++o) {
        const std::string& y = options.name(o);
        auto cc = class_count_.find(y);
        logits[o] = std::log(((cc == class_count_.end()) ? 0.0 : cc->second) + 1.0);
        for (const auto& e : h.entries()) {
            auto q = counts_.find(e.query.text);
            if (q == counts_.end()) continue;
            // Unseen answers (e.g. "cannot answer") carry no evidence.
            auto a = q->second.find(e.answer.value());
            if (a == q->second.end()) continue;
            const double vocab = static_cast<double>(q->second.size());
            double c = 0.0;
            if (auto cy = a->second.find(y); cy != a->second.end()) c = cy->second;
            double total = 0.0;
            if (auto t = totals_.at(e.query.text).find(y); t != totals_.at(e.query.text).end()) total = t->second;
            logits[o] += std::log((c + 1.0) / (total + vocab));
        }
    }
    return softmax(logits);
}

}  // namespace cip
