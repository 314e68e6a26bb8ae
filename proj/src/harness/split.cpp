#include <numeric>

#include "cip/harness.hpp"

namespace cip::harness {

Split split_three_way(std::size_t n, std::uint64_t seed) {
    if (n < 3) fail(ErrorKind::invalid_input, "a three-way split needs at least 3 instances");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SeededRng rng(seed, 0x5917);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
    // The first n % 3 parts take one extra element.
    Split s;
    std::vector<std::size_t>* parts[3] = {&s.est, &s.cal, &s.test};
    std::size_t at = 0;
    for (std::size_t p = 0; p < 3; ++p) {
        const std::size_t size = n / 3 + (p < n % 3 ? 1 : 0);
        parts[p]->assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                         order.begin() + static_cast<std::ptrdiff_t>(at + size));
        at += size;
    }
    return s;
}

Split rotate(const Split& s, std::size_t fold) {
    switch (fold % 3) {
        case 0: return s;
        case 1: return Split{s.cal, s.test, s.est};
        default: return Split{s.test, s.est, s.cal};
    }
}

}  // namespace cip::harness
