#include "gleam/rng.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gleam/error.hpp"

namespace gleam {

namespace {

// log of a Gamma(shape, 1) variate. Small shapes use the identity
// G(a) = G(a + 1) U^(1/a) so the result never underflows to log(0).
double draw_log_gamma(double shape, Rng& rng) {
  if (shape >= 1.0) return std::log(std::gamma_distribution<double>(shape, 1.0)(rng));
  const double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(rng);
  double u = draw_uniform(rng);
  while (u <= 0.0) u = draw_uniform(rng);
  return std::log(g) + std::log(u) / shape;
}

}  // namespace

double draw_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError(fmt::format("Beta shapes must be positive and finite (got {}, {})", a, b));
  const double la = draw_log_gamma(a, rng);
  const double lb = draw_log_gamma(b, rng);
  // a / (a + b) evaluated as a logistic of the log-ratio.
  const double d = lb - la;
  if (d > 0) {
    const double e = std::exp(-d);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(d));
}

int draw_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("categorical weights have no positive mass");
  double u = draw_uniform(rng) * total;
  const int n = static_cast<int>(weights.size());
  for (int k = 0; k < n; ++k) {
    if (u < weights[k]) return k;
    u -= weights[k];
  }
  // Rounding can leave u just above the last positive weight.
  for (int k = n - 1; k >= 0; --k)
    if (weights[k] > 0.0) return k;
  return n - 1;
}

}  // namespace gleam
