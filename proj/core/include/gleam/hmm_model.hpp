#pragma once

#include <array>

namespace gleam {

using Vec3 = std::array<double, 3>;
/// Row-major 3×3 matrix; rows index the conditioning state.
using Mat3 = std::array<Vec3, 3>;

/// Probability of X = n variant alleles given S = m alleles from population A.
/// Rows are S ∈ {0,1,2}, columns X ∈ {0,1,2}. Both frequencies must lie in (0,1).
Mat3 observation_matrix(double pA, double pB);

/// Marginal transition S_{j-1} → S_j with R_j ~ Binomial(2, gamma) recombinations
/// and admixture proportion rho; closed form of Σ_r Q^(r) Binom(r; 2, gamma).
Mat3 transition_matrix(double rho, double gamma);

/// Transition given exactly `recombinations` ∈ {0,1,2} events between markers.
Mat3 conditional_transition(int recombinations, double rho);

/// Hardy-Weinberg ancestry distribution [(1-rho)^2, 2 rho (1-rho), rho^2].
Vec3 initial_state_vector(double rho);

/// C(2, r) gamma^r (1-gamma)^(2-r).
double recombination_weight(int r, double gamma);

}  // namespace gleam
