#pragma once

#include <cstdint>

namespace qcdet {

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (root, stream, counter); trial results never
// depend on which worker ran them.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(root) ^ stream) ^ counter);
}

}  // namespace qcdet
