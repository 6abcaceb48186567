#pragma once

// Counter-based random stream: every draw is a hash of (key, counter), so a
// stream keyed by (seed, clip, frame, purpose) yields the same values no
// matter which order or thread generates it. Distributions are implemented
// here rather than with <random> so that output is identical across standard
// libraries.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace vqfuse {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}
    CounterRng(std::initializer_list<std::uint64_t> parts) noexcept : key_(hash_key(parts)) {}

    constexpr std::uint64_t next() noexcept { return splitmix64(key_ ^ splitmix64(++counter_)); }

    // [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next() % span);
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    // Box-Muller; the second variate is discarded.
    double normal(double mean = 0.0, double sd = 1.0) noexcept {
        if (sd == 0.0) return mean;
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace vqfuse
