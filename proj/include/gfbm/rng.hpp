#pragma once

// Deterministic seeding and Gaussian sampling. Replicate seeds are derived
// from (master seed, policy id, replicate index) by SplitMix64 so that any
// replicate can be regenerated in isolation, in any order, on any thread.
// The Gaussian uses the standards-specified mt19937_64 stream plus an explicit
// Box-Muller transform, so identical seeds give identical paths across
// platforms and standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace gfbm {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for one replicate of one policy, independent of all others.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t policy_id,
                                 std::uint64_t replicate) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s = a ^ (policy_id * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
    std::uint64_t b = splitmix64(s);
    s = b ^ (replicate * 0x9E3779B97F4A7C15ULL + 1ULL);
    return splitmix64(s);
}

/// Standard normal stream: mt19937_64 -> 53-bit uniforms -> Box-Muller.
class NormalSampler {
  public:
    explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0,1]: shift by 2^-53 so log() never sees zero.
        const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace gfbm
