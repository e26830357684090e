#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace epirt {

// All stochastic operations take an explicit generator so every run is
// reproducible from a single seed. mt19937_64 has a standard-specified
// sequence, so pinned draws survive compiler and platform changes.
using RngStream = std::mt19937_64;

inline RngStream make_stream(std::uint64_t seed) {
    return RngStream{seed};
}

// splitmix64 finalizer. Used to derive independent per-task seeds from one
// master seed; task streams stay identical no matter how work is scheduled.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform draw on the open interval (0,1); safe to feed into log().
template <class URBG>
double uniform_double(URBG& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via the Marsaglia polar method. The second value of each
// accepted pair is discarded so the helper carries no state.
template <class URBG>
double standard_normal(URBG& rng) {
    for (;;) {
        double u = 2.0 * uniform_double(rng) - 1.0;
        double v = 2.0 * uniform_double(rng) - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

}  // namespace epirt
