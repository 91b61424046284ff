#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace colltrain {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to spread a root seed over independent streams.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for the stream named `tag` (and optional `index`) under `root`:
///   mix64(mix64(root ^ fnv1a(tag)) + index)
/// Every random component of an experiment draws from its own stream so it
/// can be reproduced in isolation.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(root ^ fnv1a(tag)) + index);
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n). Lemire's multiply-shift; bias is below 2^-64 * n.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

}  // namespace colltrain
