#pragma once

// Independent reference computations shared by the unit tests.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gleam/hmm_model.hpp"

namespace oracle {

/// Exact per-locus marginals of S given X and R for one chain, by enumerating
/// all 3^J paths. Uses only the model matrices, not the forward recursion.
inline std::vector<std::array<double, 3>> path_marginals(const std::vector<std::uint8_t>& x,
                                                         const std::vector<std::uint8_t>& r,
                                                         const std::vector<double>& pA,
                                                         const std::vector<double>& pB, double rho) {
  const std::size_t J = x.size();
  std::size_t paths = 1;
  for (std::size_t j = 0; j < J; ++j) paths *= 3;
  std::vector<std::array<double, 3>> marg(J, {0.0, 0.0, 0.0});
  double total = 0.0;
  std::vector<int> s(J);
  for (std::size_t code = 0; code < paths; ++code) {
    std::size_t c = code;
    for (std::size_t j = 0; j < J; ++j) {
      s[j] = static_cast<int>(c % 3);
      c /= 3;
    }
    double w = gleam::initial_state_vector(rho)[s[0]];
    for (std::size_t j = 0; j < J; ++j) {
      if (j > 0) w *= gleam::conditional_transition(r[j], rho)[s[j - 1]][s[j]];
      w *= gleam::observation_matrix(pA[j], pB[j])[s[j]][x[j]];
    }
    total += w;
    for (std::size_t j = 0; j < J; ++j) marg[j][s[j]] += w;
  }
  for (auto& m : marg)
    for (double& v : m) v /= total;
  return marg;
}

/// Total-variation distance between two 3-point distributions.
inline double tv3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return 0.5 * (std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]));
}

}  // namespace oracle
