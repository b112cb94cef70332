#pragma once
#include <cstdint>
#include <random>

namespace rollcast {

// All randomness flows through mt19937_64 seeded via splitmix64, so a
// (seed, stream) pair names an independent reproducible substream. Ensemble
// member m draws from stream m; training uses stream 0 of its own seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ull + 1)));
}

// Fresh distribution objects per call: slightly wasteful but keeps replay
// independent of any cached second variate.
inline double randn(Rng& g) {
  std::normal_distribution<double> n;
  return n(g);
}

inline double randu(Rng& g) {  // U[0, 1)
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(g);
}

}  // namespace rollcast
