#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace cip {

// Deterministic generator identified by (seed, stream). Distinct streams are
// seeded through splitmix64 so neighbouring ids do not produce correlated
// Mersenne Twister states.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() { return engine_(); }
    double uniform();                   // [0, 1)
    std::size_t index(std::size_t n);   // uniform on [0, n), n > 0
    bool bernoulli(double p);

    // Child stream keyed by `substream`; the parent state is not consumed.
    SeededRng fork(std::uint64_t substream) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_ids(std::uint64_t a, std::uint64_t b);

}  // namespace cip
