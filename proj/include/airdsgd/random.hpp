#pragma once

// Seeded randomness with platform-independent output.
//
// std::mt19937_64 has a fully specified output sequence, but the standard
// distributions do not. All transforms below are written out so that a given
// seed produces the same bits with any standard library.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <span>

namespace airdsgd {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a path of indices,
/// e.g. derive_seed(base, {sigma_idx, tau_idx, trial}). Trial k can then be
/// reproduced without running trials 0..k-1.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  return h;
}

inline Engine make_engine(std::uint64_t seed) { return Engine(splitmix64(seed)); }

// Uniform on [0, 1) with 53 bits of resolution.
inline double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on the open interval (0, 1).
inline double uniform_open01(Engine& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Unbiased integer in [0, bound) by rejection.
inline std::uint64_t uniform_index(Engine& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = Engine::max() - Engine::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Rayleigh(sigma) by inversion: density (h / sigma^2) exp(-h^2 / (2 sigma^2)).
// Strictly positive since the uniform draw is never 1.
inline double rayleigh(Engine& rng, double sigma) {
  return sigma * std::sqrt(-2.0 * std::log(uniform_open01(rng)));
}

/// Fills `out` with i.i.d. N(0, stddev^2) draws (Box-Muller, pairs consumed in
/// order; an odd tail discards the second value of the last pair).
inline void fill_normal(Engine& rng, std::span<double> out, double stddev = 1.0) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  while (i < n) {
    const double r = std::sqrt(-2.0 * std::log(uniform_open01(rng)));
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    out[i++] = stddev * r * std::cos(phi);
    if (i < n) out[i++] = stddev * r * std::sin(phi);
  }
}

inline double standard_normal(Engine& rng) {
  double z;
  fill_normal(rng, std::span<double>(&z, 1));
  return z;
}

}  // namespace airdsgd
