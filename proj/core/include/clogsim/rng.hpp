// rng.hpp - seeded random streams and seed derivation.
//
// Every simulation run owns one Rng. Its stream is a pure function of the
// run seed, and the run seed is a pure function of (master_seed, run_index),
// so results never depend on scheduling or worker count.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace clogsim {

// Identifier written into output metadata; bump if derive_seed ever changes.
inline constexpr std::string_view kSeedDerivationId = "splitmix64-pair-v1";
inline constexpr std::string_view kRngEngineId = "mt19937_64";

// splitmix64 output finalizer (a bijection on 64-bit words).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// derive_seed(m, i) = mix(mix(m) + (i + 1) * phi), phi = 0x9E3779B97F4A7C15.
// For a fixed master seed the map i -> seed is injective (phi is odd and
// mix is a bijection), so distinct run indices never share a stream seed.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index) noexcept {
    constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(splitmix64_mix(master_seed) + (run_index + 1) * kGolden);
}

// Thin wrapper over std::mt19937_64 with platform-independent conversions.
// The std distributions are implementation-defined, so integer and real
// draws are done by hand to keep streams bit-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= threshold) return x % bound;
        }
    }

    // Uniform real in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace clogsim
