#include "cip/infotheory.hpp"

#include <algorithm>
#include <cmath>

namespace cip {

double entropy(const Distribution& d) {
    double h = 0.0;
    for (double p : d.probs()) {
        if (p > 0.0) h -= p * std::log(std::max(p, kProbabilityFloor));
    }
    return std::max(h, 0.0);
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::invalid_input, "binary entropy needs p in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

double mutual_information_gain(double h_before, double h_after) { return h_before - h_after; }

EntropyEstimate conditional_entropy_exact(const AttributeWorld& world, const Query& q, const History& h) {
    const auto prior = posterior_weights(world, h);
    double total = 0.0;
    for (double v : prior) total += v;
    if (!(total > 0.0)) fail(ErrorKind::empty_support, "history is inconsistent with every label");

    const std::size_t j = world.require_query_index(q);
    const double eps = world.answer_noise();
    double value = 0.0;
    for (bool said_yes : {true, false}) {
        std::vector<double> joint(prior.size());
        double p_answer = 0.0;
        for (std::size_t y = 0; y < prior.size(); ++y) {
            joint[y] = prior[y] / total * ((world.attribute(y, j) == said_yes) ? 1.0 - eps : eps);
            p_answer += joint[y];
        }
        if (p_answer <= 0.0) continue;
        value += p_answer * entropy(Distribution::floored(std::move(joint)));
    }
    return {value, 0, 0.0, false};
}

HypothesisAverage average_over_hypotheses(const Predictor& predictor, const HypothesisSampler& sampler,
                                          const Query& q, const History& h, const Subject& episode,
                                          std::size_t n_est, SeededRng& rng,
                                          const std::function<double(const Distribution&)>& statistic) {
    if (n_est < 1) fail(ErrorKind::invalid_input, "n_est must be at least 1");
    const HypothesisDraw draw = sampler.draw(q, h, episode, n_est, rng);
    if (draw.outcomes.empty()) fail(ErrorKind::sampling, "sampler produced no hypotheses");

    std::vector<double> values;
    values.reserve(draw.outcomes.size());
    double mean = 0.0;
    for (const auto& o : draw.outcomes) {
        const History extended = h.extend(q, o.answer);
        const double v = statistic(predictor.predict(extended, Subject{episode.instance, o.label}));
        values.push_back(v);
        mean += o.weight * v;
    }

    HypothesisAverage out;
    out.mean = mean;
    out.replacement_fallback = draw.replacement_fallback;
    if (draw.exact) return out;

    out.n_samples = values.size();
    if (values.size() > 1) {
        double ss = 0.0;
        double plain_mean = 0.0;
        for (double v : values) plain_mean += v;
        plain_mean /= static_cast<double>(values.size());
        for (double v : values) ss += (v - plain_mean) * (v - plain_mean);
        const double n = static_cast<double>(values.size());
        out.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return out;
}

EntropyEstimate conditional_entropy_mc(const Predictor& predictor, const HypothesisSampler& sampler,
                                       const Query& q, const History& h, std::size_t n_est, SeededRng& rng,
                                       const Subject& episode) {
    const auto avg = average_over_hypotheses(predictor, sampler, q, h, episode, n_est, rng,
                                             [](const Distribution& d) { return entropy(d); });
    return {avg.mean, avg.n_samples, avg.std_error, avg.replacement_fallback};
}

}  // namespace cip
