#pragma once

#include <cstdint>
#include <random>

namespace eddp {

/**
 * Seeded generator used for all sampling in the library.
 *
 * Engine: std::mt19937_64 (fully specified by the C++ standard).
 * uniform(): top 53 bits of one draw times 2^-53, in [0, 1).
 * below(n): rejection sampling on the largest multiple of n below 2^64.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Uniform integer in [lo, hi].
    int integer(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1)); }

private:
    std::mt19937_64 engine_;
};

/// Deterministic child seed from (master, a, b) by splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

} // namespace eddp
