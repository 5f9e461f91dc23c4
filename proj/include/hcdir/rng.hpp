#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hcdir {

// All randomness in a run flows from one root seed. Independent consumers
// derive their own stream by name so adding a consumer never perturbs the
// draws of another.
inline uint64_t substream_seed(uint64_t root, std::string_view name) {
  // FNV-1a over the name, then a splitmix64 finalizer mixing in the root.
  uint64_t h = 14695981039346656037ull;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  uint64_t z = root + 0x9e3779b97f4a7c15ull + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 substream(uint64_t root, std::string_view name) {
  return std::mt19937_64(substream_seed(root, name));
}

}  // namespace hcdir
