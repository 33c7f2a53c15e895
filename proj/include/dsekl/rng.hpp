#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "dsekl/dataset.hpp"

namespace dsekl {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent child seed. Streams are addressed by (parent, tag),
/// so adding a new consumer never shifts the draws of an existing one.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
    return mix64(mix64(parent) ^ mix64(tag + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t stream_tag(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (const char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream) { return Rng(derive_seed(seed, stream_tag(stream))); }

/// Uniform sample of `size` distinct indices from [0, n), in draw order.
/// A request larger than n is clamped to the full set.
std::vector<Index> sample_indices(std::size_t n, std::size_t size, Rng& rng);

}  // namespace dsekl
