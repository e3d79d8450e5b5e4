#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace semtts {

/// Seeded generator whose output is identical on every platform.
///
/// std::*_distribution results are implementation-defined, so all draws go
/// through the raw 64-bit engine output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

/// FNV-1a, used to derive stable per-row seeds from utterance ids.
std::uint64_t fnv1a(std::string_view text) noexcept;

/// Mixes a base seed with a salt (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

} // namespace semtts
