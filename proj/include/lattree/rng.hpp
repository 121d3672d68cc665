#pragma once

#include <cstdint>
#include <random>

namespace lattree {

// Seedable random source. Every sampler takes one of these explicitly so
// replicas can run on independent, reproducible streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return unif_(eng_); }                  // [0,1)
    double uniform(double a, double b) { return a + (b - a) * unif_(eng_); }
    double normal() { return norm_(eng_); }
    double exponential() { return exp_(eng_); }
    std::uint64_t next_u64() { return eng_(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
        return d(eng_);
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
    std::normal_distribution<double> norm_{0.0, 1.0};
    std::exponential_distribution<double> exp_{1.0};
};

// splitmix64 finalizer, used to derive per-replica sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Rng sub_rng(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix_seed(seed, index));
}

} // namespace lattree
