#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace ch4flux::rng {

// Counter-based generator: every draw is a pure function of
// (seed, stream, i, j, k, slot), so results do not depend on evaluation order
// or worker count.
inline constexpr std::string_view kGeneratorName = "splitmix64-counter";
inline constexpr int kGeneratorVersion = 1;

enum class Stream : std::uint64_t {
    noise = 1,
    stripe = 2,
    background = 3,
    texture = 4,
    endmember = 5,
};

constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, Stream stream, std::uint64_t i,
                                     std::uint64_t j, std::uint64_t k, std::uint64_t slot) {
    std::uint64_t h = mix64(seed ^ (static_cast<std::uint64_t>(stream) << 56));
    h = mix64(h ^ i);
    h = mix64(h ^ (j + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (k + 0x8cb92ba72f3d8dd7ULL));
    return mix64(h ^ slot);
}

/// Uniform on the open interval (0, 1).
inline double uniform(std::uint64_t seed, Stream stream, std::uint64_t i, std::uint64_t j,
                      std::uint64_t k, std::uint64_t slot = 0) {
    const std::uint64_t h = counter_hash(seed, stream, i, j, k, slot);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two counter slots.
inline double normal(std::uint64_t seed, Stream stream, std::uint64_t i, std::uint64_t j,
                     std::uint64_t k) {
    const double u1 = uniform(seed, stream, i, j, k, 0);
    const double u2 = uniform(seed, stream, i, j, k, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ch4flux::rng
