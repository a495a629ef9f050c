#pragma once

#include <cstdint>
#include <string_view>

namespace tdcstate {

// 64-bit FNV-1a; stable across platforms, used for stream names and
// provenance hashes.
constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of stream (stage, index) under a master seed:
// splitmix64(splitmix64(master ^ fnv1a64(stage)) + index).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                                    std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ fnv1a64(stage)) + index);
}

}  // namespace tdcstate
