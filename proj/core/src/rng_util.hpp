#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rtprop::detail {

// splitmix64, used to derive independent seed streams from one user seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform draw in [0, 1) built directly from the top 53 bits, so results
// do not depend on the standard library's distribution implementation.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double exponential(std::mt19937_64& g) {
  // -log(1 - u) with u in [0, 1); the argument stays strictly positive.
  return -std::log(1.0 - uniform01(g));
}

}  // namespace rtprop::detail
