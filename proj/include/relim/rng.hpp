#pragma once

#include <cstdint>
#include <span>

#include "relim/errors.hpp"

namespace relim {

// splitmix64 finalizer: a bijective 64-bit mix with good avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic counter-based random stream. A stream's identity is the
// triple (master_seed, seed_index, component_tag); draws never depend on
// the platform's library distributions, so output is bit-reproducible
// everywhere. One stream must never be shared across concurrent episodes.
class Rng {
  public:
    Rng() : state_(mix64(0)) {}

    static Rng stream(std::uint64_t master_seed, std::uint64_t seed_index,
                      std::uint64_t component_tag) {
        Rng r;
        std::uint64_t s = mix64(master_seed);
        s = mix64(s ^ mix64(seed_index ^ 0x5851f42d4c957f2dULL));
        s = mix64(s ^ mix64(component_tag ^ 0x14057b7ef767814fULL));
        r.state_ = s;
        return r;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0,n) without modulo bias (Lemire's method).
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw InputError("next_below: n must be positive");
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t threshold = (0ULL - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Index drawn proportionally to non-negative weights (need not be
    // normalized). Falls back to the last positive weight on accumulated
    // round-off past the total.
    std::size_t sample_discrete(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw InputError("sample_discrete: weights sum to zero");
        double u = next_double() * total;
        double acc = 0.0;
        std::size_t last_pos = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > 0.0) last_pos = i;
            acc += weights[i];
            if (u < acc) return i;
        }
        return last_pos;
    }

  private:
    std::uint64_t state_;
};

// Component tags for stream derivation. Environment and action streams are
// separate so every learner sees the identical (context, reward) sequence
// for a given (master_seed, seed_index).
namespace stream_tag {
inline constexpr std::uint64_t instance = 1;
inline constexpr std::uint64_t environment = 2;
inline constexpr std::uint64_t actions = 3;
inline constexpr std::uint64_t diagnostics = 4;
}  // namespace stream_tag

}  // namespace relim
