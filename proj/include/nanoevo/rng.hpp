#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace nanoevo {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of replicate `index` under `master`: splitmix64(master ^ splitmix64(index + 1)).
/// Replicate streams are independent of how many replicates run or in which order.
inline constexpr std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return splitmix64(master ^ splitmix64(index + 1));
}

/// Seeded random source. Wraps mt19937_64 (whose output sequence is fixed by the
/// standard) and derives every variate itself, so streams are identical across
/// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n)
    {
        const std::uint64_t bound = n;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = engine_();
        while (x >= limit)
            x = engine_();
        return static_cast<std::size_t>(x % bound);
    }

    /// Uniform integer in [lo, hi].
    int integer(int lo, int hi) { return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo) + 1)); }

    bool bernoulli(double p) { return uniform() < p; }

    double normal(double mean, double sd)
    {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sd * spare_;
        }
        // Box-Muller on (0, 1]
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + sd * r * std::cos(theta);
    }

    /// Exponential waiting time with the given rate (> 0).
    double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace nanoevo
