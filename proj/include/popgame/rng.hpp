#pragma once

#include <cstdint>

namespace popgame {

// SplitMix64. The generator algorithm is part of the reproducibility
// contract: the same seed must produce the same trajectory on every platform
// and in every port of this tool, so a named, trivially portable generator is
// used instead of the standard-library engines.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t x = (state_ += 0x9E3779B97F4A7C15ULL);
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // The stateless finalizer of the generator, usable as a mixing function.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

  private:
    std::uint64_t state_;
};

// Per-run seed for batch experiments: mix(base ^ run_index). Documented so
// that independent reimplementations can reproduce run-level results.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t run_index) {
    return SplitMix64::mix(base ^ run_index);
}

}  // namespace popgame
