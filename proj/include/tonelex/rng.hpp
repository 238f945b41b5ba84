#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tonelex {

/// FNV-1a, used to derive stable per-key sub-seeds so that results do not
/// depend on container iteration order.
constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t h = 1469598103934665603ull) {
  for (char c : s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 1099511628211ull;
  }
  return h;
}

/// splitmix64 finalizer; decorrelates structured seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view key) {
  return mix64(master ^ fnv1a64(key));
}

inline std::mt19937_64 seeded_rng(std::uint64_t master, std::string_view key) {
  return std::mt19937_64(derive_seed(master, key));
}

}  // namespace tonelex
