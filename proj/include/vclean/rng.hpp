#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace vclean {

// Single random source for the whole project. The engine is std::mt19937_64
// (its output sequence is pinned by the standard) and every distribution is
// implemented here on top of the raw 64-bit stream, so a given seed produces
// the same values on any platform, not just within one standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53 random bits.
    double uniform();

    // Uniform in [lo, hi).
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; the second value of each pair is
    // cached, so draws come in deterministic order.
    double normal();

    // Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

// In-place Fisher-Yates shuffle driven by Rng::below.
void shuffle_indices(std::vector<std::size_t>& items, Rng& rng);

}  // namespace vclean
