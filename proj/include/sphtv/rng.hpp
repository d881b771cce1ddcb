#pragma once

// Deterministic small-state random streams. The generator is splitmix64
// (Steele/Lea/Vigna); Gaussian draws come from Box-Muller on that stream.
// Every consumer owns its stream, derived from (seed, tag...) so that
// parallel trials reproduce bit-identically in any execution order.

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "sphtv/grid.hpp"

namespace sphtv {

namespace detail {
inline std::uint64_t splitmix64_step(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    /// Derive an independent stream from a base seed and a tag path.
    /// Each tag is folded through one splitmix64 output step.
    static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
        std::uint64_t s = seed;
        for (std::uint64_t tag : tags) {
            std::uint64_t t = tag;
            s ^= detail::splitmix64_step(t);
            (void)detail::splitmix64_step(s);
        }
        return RngStream(s);
    }

    std::uint64_t next_u64() { return detail::splitmix64_step(state_); }

    /// Uniform double in the open interval (0, 1).
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n), modulo-rejection so the draw is unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r < threshold);
        return r % n;
    }

    /// Standard normal draw, Box-Muller, second value of each pair cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Tags for stream derivation, so mask and noise streams never collide.
namespace rng_tag {
inline constexpr std::uint64_t mask = 0x6D61736Bu;      // "mask"
inline constexpr std::uint64_t noise = 0x6E6F6973u;     // "nois"
inline constexpr std::uint64_t signal = 0x7369676Eu;    // "sign"
inline constexpr std::uint64_t power = 0x706F7772u;     // "powr"
}  // namespace rng_tag

}  // namespace sphtv
