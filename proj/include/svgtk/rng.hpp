#pragma once

#include <cstdint>

namespace svgtk {

/// Seeded deterministic stream (splitmix64). Same seed gives the same stream
/// on every platform; all randomness in this library flows through it.
struct Rng {
    std::uint64_t state = 0;

    Rng() = default;
    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        // Rejection-free multiply-shift; bias is < 2^-64 * n, irrelevant here.
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Derives an independent stream for (seed, index) pairs, e.g. one per
    /// candidate rollout.
    static Rng derive(std::uint64_t seed, std::uint64_t index) {
        Rng mixer(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
        return Rng(mixer.next_u64());
    }
};

}  // namespace svgtk
