#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace orbitfeat {

// All randomness in the library flows through this header. The engine is
// std::mt19937_64 (bit-exact sequence fixed by the C++ standard) and every
// distribution transform is implemented explicitly below, so identical seeds
// give identical streams independent of the standard library build.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives a child seed from a master seed and a stream index. Distinct
/// stream indices give statistically independent child streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0xA0761D6478BD642Full * (stream + 1));
    return splitmix64_next(s);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    /// Standard normal via Marsaglia's polar method.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stream tags used when splitting a master seed. Keeping them in one place
// avoids accidental collisions between modules.
namespace seed_stream {
inline constexpr std::uint64_t kTemplates = 1;
inline constexpr std::uint64_t kPhases = 2;
inline constexpr std::uint64_t kGroupPool = 3;
inline constexpr std::uint64_t kLandmarks = 4;
inline constexpr std::uint64_t kOracleX = 5;
inline constexpr std::uint64_t kOracleY = 6;
inline constexpr std::uint64_t kFolds = 7;
inline constexpr std::uint64_t kTaskTrain = 8;
inline constexpr std::uint64_t kTaskTest = 9;
inline constexpr std::uint64_t kLayer2 = 10;
inline constexpr std::uint64_t kBatch = 11;
inline constexpr std::uint64_t kPairs = 12;
}  // namespace seed_stream

}  // namespace orbitfeat
