#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace evorl {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based key derivation: hashes an ordered list of words into one
/// 64-bit stream key. Used so that any (seed, generation, index) tuple can be
/// regenerated independently of evaluation order.
constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept
{
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t w : words)
        h = mix64(h ^ mix64(w));
    return h;
}

inline Rng make_rng(std::uint64_t key)
{
    return Rng(mix64(key));
}

inline double standard_normal(Rng& rng)
{
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

inline double uniform(Rng& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
}

} // namespace evorl
