#pragma once

#include <cstdint>

#include "valagg/vec.hpp"

namespace valagg {

// splitmix64; fixed algorithm so seeded runs are reproducible across platforms.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform point in a box given by lower/upper vectors.
    Vec uniform_in_box(const Vec& lower, const Vec& upper) {
        Vec p(lower.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = uniform(lower[i], upper[i]);
        return p;
    }
};

/// Derives an independent stream seed from a base seed and a stream index.
inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index) {
    Rng r(base ^ (0x51d1b4f5a62e1e2dULL * (index + 1)));
    return r.next_u64();
}

}  // namespace valagg
