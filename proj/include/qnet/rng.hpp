#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace qnet {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

/// Seedable random source. Children derived with split() depend only on the
/// parent seed and the split key, never on how many draws the parent made,
/// so per-agent and per-system streams are reproducible regardless of
/// scheduling or evaluation order.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0)
        : seed_(seed), engine_(detail::splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= bound);
        return x % n;
    }

    /// Standard normal via Box-Muller (no cached spare, for reproducibility).
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Rng split(std::string_view key) const {
        return Rng(detail::splitmix64(seed_ ^ detail::fnv1a64(key)));
    }

    Rng split(std::uint64_t index) const {
        return Rng(detail::splitmix64(seed_ ^ detail::splitmix64(index + 0x632be59bd9b4e019ULL)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace qnet
