#pragma once

#include <cstdint>
#include <string_view>

namespace tfvb {

/// Independent seed for a named random stream ("init", "mask", "noise", ...).
/// Stable across platforms: FNV-1a of the stream name mixed with splitmix64.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                                    std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(mix(seed ^ h) + index);
}

}  // namespace tfvb
