#pragma once

#include <cstdint>
#include <random>

namespace silt {

/// SplitMix64 finalizer. A bijection on 64-bit words with good avalanche,
/// used both for seed splitting and for counter-based per-site draws.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of replicate `index` under `base`. Each replicate owns an independent,
/// individually replayable stream.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(base + index);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine{seed}; }

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1] with 53 random bits; never returns zero.
inline double uniform_open0(Engine& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

constexpr double bits_to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace silt
