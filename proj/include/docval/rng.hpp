#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace docval {

// std::mt19937_64 is fully specified by the standard, the distributions are
// not; these helpers keep seeded draws identical across standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Independent stream per (seed, key, salt) so per-record draws do not depend
// on processing order.
inline std::mt19937_64 keyed_engine(std::uint64_t seed, std::string_view key, std::uint64_t salt = 0) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(fnv1a64(key) ^ splitmix64(salt))));
}

// Uniform integer in [lo, hi] by rejection sampling.
inline std::int64_t uniform_int(std::mt19937_64 & rng, std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) {
        return static_cast<std::int64_t>(rng());
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t       v     = rng();
    while (v >= limit) {
        v = rng();
    }
    return lo + static_cast<std::int64_t>(v % span);
}

// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64 & rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename It> void seeded_shuffle(It first, It last, std::mt19937_64 & rng) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
        const auto j = uniform_int(rng, 0, i);
        std::iter_swap(first + i, first + j);
    }
}

}  // namespace docval
