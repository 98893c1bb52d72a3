#pragma once

#include <cstdint>
#include <random>

namespace privbench {

/// splitmix64 step; used to derive independent per-run seeds from one master
/// seed so that seed lists recorded in reports are reproducible integers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t out = 0;
  for (std::uint64_t i = 0; i <= index; ++i) out = splitmix64(s);
  return out;
}

/// All stochastic components draw from a mt19937_64 seeded through splitmix64,
/// never from the raw user seed, so nearby seeds give unrelated streams.
inline std::mt19937_64 make_engine(std::uint64_t seed) {
  std::uint64_t s = seed;
  return std::mt19937_64(splitmix64(s));
}

}  // namespace privbench
