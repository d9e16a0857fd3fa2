#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace albatch {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a; stream labels are short compile-time strings.
constexpr std::uint64_t hash_label(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Derives a child seed from a parent seed and a sequence of integer keys.
template <typename... Keys>
std::uint64_t derive_seed(std::uint64_t parent, Keys... keys) {
    std::uint64_t s = detail::splitmix64(parent);
    ((s = detail::splitmix64(s ^ static_cast<std::uint64_t>(keys))), ...);
    return s;
}

/// Labeled child stream: the same (seed, label, index) always yields the same
/// generator, so code paths that coincide across strategies draw identical values.
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    return derive_seed(seed, detail::hash_label(label), index);
}

inline Rng make_stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    return Rng(stream_seed(seed, label, index));
}

}  // namespace albatch
