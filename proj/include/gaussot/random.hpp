#pragma once

#include <cstdint>
#include <random>

namespace gaussot {

/**
 * @brief Seeded generator used everywhere randomness is needed.
 *
 * Bits come from std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Uniforms take the top 53 bits: u = (x >> 11) * 2^-53. Normals use
 * the Box-Muller transform on (1 - u1, u2), emitting the cosine branch first
 * and caching the sine branch. The standard library distributions are not
 * used because their algorithms differ between implementations.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal();

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace gaussot
