#include "cip/worlds/samplers.hpp"

#include <numeric>

namespace cip {

std::size_t sample_categorical(const std::vector<double>& weights, SeededRng& rng) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) fail(ErrorKind::empty_support, "cannot sample from zero weights");
    double u = rng.uniform() * total;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        last = i;
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    return last;
}

PosteriorHypothesisSampler::PosteriorHypothesisSampler(const AttributeWorld& world, const Predictor* predictor,
                                                       HypothesisMode mode)
    : world_(world), predictor_(predictor), mode_(mode) {
    if (mode == HypothesisMode::predictor_posterior && predictor == nullptr) {
        fail(ErrorKind::configuration, "predictor-posterior sampling needs a predictor");
    }
}

HypothesisDraw PosteriorHypothesisSampler::draw(const Query& q, const History& h, const Subject& episode,
                                                std::size_t n, SeededRng& rng) const {
    if (n < 1) fail(ErrorKind::invalid_input, "n_est must be at least 1");
    HypothesisDraw out;
    if (mode_ == HypothesisMode::exhaustive) {
        auto w = posterior_weights(world_, h);
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        if (!(total > 0.0)) fail(ErrorKind::empty_support, "history is inconsistent with every label");
        out.exact = true;
        for (std::size_t y = 0; y < w.size(); ++y) {
            if (w[y] <= 0.0) continue;
            ++out.n_hypotheses;
            for (const auto& o : world_.answer_outcomes(y, q)) {
                if (o.probability > 0.0) out.outcomes.push_back({o.answer, y, w[y] / total * o.probability});
            }
        }
        return out;
    }

    std::vector<double> weights;
    switch (mode_) {
        case HypothesisMode::predictor_posterior:
            weights = predictor_->predict(h, episode).probs();
            break;
        case HypothesisMode::exact_posterior:
            weights = exact_posterior(world_, h).probs();
            break;
        case HypothesisMode::uniform_consistent:
            weights = posterior_weights(world_, h);
            for (double& v : weights) v = v > 0.0 ? 1.0 : 0.0;
            break;
        case HypothesisMode::exhaustive:
            break;
    }
    out.n_hypotheses = n;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t y = sample_categorical(weights, rng);
        out.outcomes.push_back({answer_query(world_, y, q, rng), y, 1.0 / static_cast<double>(n)});
    }
    return out;
}

PoolHypothesisSampler::PoolHypothesisSampler(const World& world, std::vector<std::size_t> pool)
    : world_(world), pool_(std::move(pool)) {
    if (pool_.empty()) fail(ErrorKind::invalid_input, "hypothesis pool is empty");
}

HypothesisDraw PoolHypothesisSampler::draw(const Query& q, const History&, const Subject&, std::size_t n,
                                           SeededRng& rng) const {
    if (n < 1) fail(ErrorKind::invalid_input, "n_est must be at least 1");
    HypothesisDraw out;
    out.n_hypotheses = n;
    std::vector<std::size_t> chosen;
    if (n <= pool_.size()) {
        std::vector<std::size_t> idx = pool_;
        for (std::size_t i = 0; i < n; ++i) {
            std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
            chosen.push_back(idx[i]);
        }
    } else {
        out.replacement_fallback = true;
        for (std::size_t i = 0; i < n; ++i) chosen.push_back(pool_[rng.index(pool_.size())]);
    }
    for (std::size_t s : chosen) {
        out.outcomes.push_back({world_.answer(s, q, rng), world_.true_label(s), 1.0 / static_cast<double>(n)});
    }
    return out;
}

namespace {

std::vector<std::size_t> all_subjects(const World& w) {
    std::vector<std::size_t> v(w.num_subjects());
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

std::vector<double> checked_weights(std::vector<double> weights, std::size_t n) {
    if (weights.empty()) return std::vector<double>(n, 1.0);
    if (weights.size() != n) fail(ErrorKind::shape, "population weights length mismatch");
    return weights;
}

Subject draw_subject(const World& world, const std::vector<std::size_t>& population,
                     const std::vector<double>& weights, SeededRng& rng) {
    const std::size_t s = population[sample_categorical(weights, rng)];
    return {s, world.true_label(s)};
}

}  // namespace

UniformHistorySampler::UniformHistorySampler(const World& world, std::vector<std::size_t> population,
                                             std::vector<double> weights)
    : world_(world), population_(std::move(population)), weights_(checked_weights(std::move(weights), population_.size())) {
    if (population_.empty()) fail(ErrorKind::invalid_input, "empty calibration population");
}

UniformHistorySampler::UniformHistorySampler(const AttributeWorld& world)
    : UniformHistorySampler(world, all_subjects(world), world.prior().probs()) {}

SampledHistory UniformHistorySampler::sample(std::size_t k, SeededRng& rng) const {
    SampledHistory out{History(false), draw_subject(world_, population_, weights_, rng)};
    const auto& pool = world_.queries_for(out.subject.instance);
    if (pool.empty() && k > 0) fail(ErrorKind::sampling, "subject has no queries");
    for (std::size_t i = 0; i < k; ++i) {
        const Query& q = pool[rng.index(pool.size())];
        out.history = out.history.extend(q, world_.answer(out.subject.instance, q, rng));
    }
    return out;
}

DpHistorySampler::DpHistorySampler(const World& world, const QueryProposer& proposer,
                                   std::vector<std::size_t> population, std::vector<double> weights)
    : world_(world),
      proposer_(proposer),
      population_(std::move(population)),
      weights_(checked_weights(std::move(weights), population_.size())) {
    if (population_.empty()) fail(ErrorKind::invalid_input, "empty calibration population");
}

SampledHistory DpHistorySampler::sample(std::size_t k, SeededRng& rng) const {
    SampledHistory out{History(false), draw_subject(world_, population_, weights_, rng)};
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<Query> proposed;
        try {
            proposed = proposer_.propose(out.history, 1, out.subject);
        } catch (const Error& e) {
            throw Error(ErrorKind::sampling, std::string("proposer failed: ") + e.what());
        }
        if (proposed.empty()) fail(ErrorKind::sampling, "proposer returned no query");
        out.history = out.history.extend(proposed.front(), world_.answer(out.subject.instance, proposed.front(), rng));
    }
    return out;
}

SampledHistory sample_uniform_history(const AttributeWorld& w, std::size_t k, SeededRng& rng) {
    return UniformHistorySampler(w).sample(k, rng);
}

SampledHistory sample_dp_history(const QueryProposer& proposer, const World& answer_source, std::size_t k,
                                 SeededRng& rng) {
    std::vector<double> weights;
    if (auto* attr = dynamic_cast<const AttributeWorld*>(&answer_source)) weights = attr->prior().probs();
    return DpHistorySampler(answer_source, proposer, all_subjects(answer_source), std::move(weights)).sample(k, rng);
}

std::vector<Query> ScriptedProposer::propose(const History& h, std::size_t m, const Subject&) const {
    if (m < 1) fail(ErrorKind::invalid_input, "m must be at least 1");
    const std::size_t start = h.size() * m;
    if (start + m > script_.size()) fail(ErrorKind::proposal, "proposer script exhausted");
    return {script_.begin() + static_cast<std::ptrdiff_t>(start),
            script_.begin() + static_cast<std::ptrdiff_t>(start + m)};
}

}  // namespace cip
