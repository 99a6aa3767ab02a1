#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace edrl {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stable seed derivation: one master seed plus a path of tags yields
// independent, reproducible streams (per member, per generation, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(base ^ 0xD1B54A32D192ED03ULL);
    for (std::uint64_t p : path) s = splitmix64(s ^ (p + 0x9E3779B97F4A7C15ULL));
    return s;
}

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> path = {}) {
    return Rng(derive_seed(base, path));
}

} // namespace edrl
