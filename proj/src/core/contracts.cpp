#include "cip/core/contracts.hpp"

#include "cip/core/error.hpp"

namespace cip {

Answer World::answer(std::size_t subject, const Query& q, SeededRng& rng) const {
    const auto outcomes = answer_outcomes(subject, q);
    if (outcomes.empty()) fail(ErrorKind::answer, "no answer outcomes for query '" + q.id + "'");
    if (outcomes.size() == 1) return outcomes.front().answer;
    double u = rng.uniform();
    for (const auto& o : outcomes) {
        if (u < o.probability) return o.answer;
        u -= o.probability;
    }
    return outcomes.back().answer;
}

}  // namespace cip
