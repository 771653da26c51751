#pragma once

// Seeded random streams.
//
// Every stream is an std::mt19937_64 whose seed is a splitmix64 hash of a
// (base seed, key...) tuple. Both algorithms are fully specified, and the
// uniform/categorical draws below avoid the implementation-defined standard
// distributions, so a given key reproduces bit-identical draws on any
// conforming platform.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace rmab {

inline constexpr const char* kGeneratorName = "mt19937_64+splitmix64";

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Order-sensitive hash of a key tuple onto a 64-bit seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> key) noexcept {
    std::uint64_t h = splitmix64(base);
    for (auto k : key) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    RandomStream(std::uint64_t base, std::initializer_list<std::uint64_t> key)
        : engine_(derive_seed(base, key)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n) {
        auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Inverse-CDF draw from a probability vector; one uniform per call.
    std::size_t categorical(std::span<const double> probs) { return categorical(probs, uniform()); }

    static std::size_t categorical(std::span<const double> probs, double u) {
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] <= 0.0) continue;
            last_positive = i;
            acc += probs[i];
            if (u < acc) return i;
        }
        return last_positive;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace rmab
