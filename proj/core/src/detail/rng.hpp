#pragma once

#include <cstdint>
#include <string_view>

namespace coral::detail {

/// splitmix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent, reproducible stream id for (seed, name, index) triples.
inline std::uint64_t derive_stream(std::uint64_t seed, std::string_view name,
                                   std::uint64_t index) {
  return mix64(seed ^ mix64(hash_string(name)) ^ mix64(index));
}

}  // namespace coral::detail
