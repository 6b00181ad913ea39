#pragma once

#include <cstdint>
#include <random>

namespace mlcmeta {

// Seeded pseudo-random generator with a pinned algorithm so that results are
// bit-reproducible across platforms and library versions.
//
// Engine: std::mt19937_64 (the 64-bit Mersenne Twister as specified by the
// C++ standard, so its output stream is identical everywhere). Bounded draws
// use rejection sampling on the raw 64-bit output instead of
// std::uniform_int_distribution, whose mapping is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform draw from [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        // Largest multiple of n that fits in 64 bits; values at or above it
        // are rejected to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace mlcmeta
