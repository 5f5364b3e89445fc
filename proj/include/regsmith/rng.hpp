#pragma once

#include <cstdint>

namespace regsmith::matgen {

/// splitmix64 finalizer; the documented 64-bit avalanche mix.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic per-trial stream derivation: master seed XOR the
/// golden-ratio-scrambled trial index, pushed through mix64.
struct SeedPolicy {
    std::uint64_t master_seed = 0;
    std::uint64_t trial_index = 0;

    std::uint64_t stream_seed() const {
        return mix64(master_seed ^ (trial_index * 0x9E3779B97F4A7C15ull));
    }
};

/// xoshiro256** (Blackman/Vigna), seeded from a single 64-bit value via
/// splitmix64. Identifier "xoshiro256ss-v1" is recorded in every output file.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            x += 0x9E3779B97F4A7C15ull;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
            word = z ^ (z >> 31);
        }
    }
    explicit Xoshiro256(const SeedPolicy& sp) : Xoshiro256(sp.stream_seed()) {}

    std::uint64_t next() {
        auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, bound); bound >= 1. Unbiased (rejection).
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t limit = -bound % bound;  // == 2^64 mod bound
        std::uint64_t x;
        do {
            x = next();
        } while (x < limit);
        return x % bound;
    }

private:
    std::uint64_t s_[4];
};

}  // namespace regsmith::matgen
