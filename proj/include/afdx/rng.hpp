#pragma once

#include <cstdint>
#include <random>

#include "afdx/core.hpp"

namespace afdx::rng {

// splitmix64 finalizer; good enough to decorrelate derived stream seeds
inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed plus labels.
/// Streams are keyed per VL and per purpose so that adding a VL to a
/// scenario does not perturb the draws of the others.
inline std::uint64_t derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) {
    return mix(mix(mix(mix(master) ^ a) ^ b) ^ c);
}

enum class Purpose : std::uint64_t {
    Jitter = 1,
    ChannelDelay = 2,
    TechLatency = 3,
    OutputProcessing = 4,
    Generator = 5,
};

/// Deterministic uniform sampler. mt19937_64 output is pinned by the
/// standard and the bounded mapping below is rejection-based, so the
/// same seed yields the same draws on every platform.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Unbiased uniform draw in [0, bound).
    std::uint64_t u64_below(std::uint64_t bound) {
        if (bound == 0) return next_u64();
        const std::uint64_t reject_below = (UINT64_MAX % bound + 1) % bound;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= reject_below) return x % bound;
        }
    }

    /// Uniform draw over the closed interval [lo, hi].
    Ns uniform_ns(Ns lo, Ns hi) {
        if (hi <= lo) return lo;
        return lo + static_cast<Ns>(u64_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace afdx::rng
