#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tdc {

// SplitMix64 finalizer. Statistically solid and cheap; used as the mixing
// core of the counter RNG below.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based RNG: every draw is a pure function of (seed, counter), so a
// stream can be evaluated in any order and split across workers while
// reproducing the single-threaded sequence exactly.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(splitmix64(seed ^ 0x5bf0363546e37ed1ULL)) {}

    std::uint64_t bits(std::uint64_t counter) const {
        return splitmix64(seed_ + counter * 0x9e3779b97f4a7c15ULL);
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes counters 2c and 2c+1.
    double gaussian(std::uint64_t counter) const {
        double u1 = uniform(2 * counter);
        double u2 = uniform(2 * counter + 1);
        if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

}  // namespace tdc
