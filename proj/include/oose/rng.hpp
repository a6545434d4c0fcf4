#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "oose/types.hpp"

namespace oose {

// splitmix64 finalizer; used to decorrelate (seed, stream) pairs before
// seeding the engine, so generators can split one user seed into
// independent substreams (shape parameters vs additive noise, etc.).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic random stream.  mt19937_64's output sequence is fixed by the
// standard, and every distribution here is hand-rolled, so a (seed, stream)
// pair yields the same doubles on any platform.  std::*_distribution is
// deliberately avoided: its mapping is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(mix64(mix64(seed) ^ (0x5851f42d4c957f2dull * (stream + 1)))) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the spare of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();  // log(0) guard
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;  // 2*pi
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n), Lemire multiply-shift (no modulo bias worth
  // worrying about at these ranges, and fully deterministic).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates permutation of {0, ..., m-1}.
inline std::vector<Index> random_permutation(Index m, Rng& rng) {
  std::vector<Index> p(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) p[static_cast<std::size_t>(i)] = i;
  for (Index i = m - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

}  // namespace oose
