#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace gleam {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent generator from a root seed and a key path such as
/// (sweep, phase, subject). The same key path always yields the same stream,
/// which is what makes parallel sweeps independent of the worker count.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return Rng(h);
}

inline double draw_uniform(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double draw_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Beta(a, b) through the gamma-ratio construction. Shapes must be positive.
double draw_beta(double a, double b, Rng& rng);

inline int draw_binomial(int n, double p, Rng& rng) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  return std::binomial_distribution<int>(n, p)(rng);
}

/// Draws an index with probability proportional to `weights`. The weights need
/// not be normalized; their sum must be positive.
int draw_categorical(std::span<const double> weights, Rng& rng);

}  // namespace gleam
