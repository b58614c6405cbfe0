#include "gleam/hmm_model.hpp"

#include <fmt/format.h>

#include "gleam/error.hpp"

namespace gleam {

namespace {

void require_closed_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError(fmt::format("{} = {} outside [0, 1]", name, v));
}

}  // namespace

Mat3 observation_matrix(double pA, double pB) {
  if (!(pA > 0.0 && pA < 1.0)) throw DomainError(fmt::format("pA = {} outside (0, 1)", pA));
  if (!(pB > 0.0 && pB < 1.0)) throw DomainError(fmt::format("pB = {} outside (0, 1)", pB));
  const double qA = 1.0 - pA;
  const double qB = 1.0 - pB;
  return Mat3{{
      {qB * qB, 2.0 * pB * qB, pB * pB},
      {qA * qB, pA * qB + pB * qA, pA * pB},
      {qA * qA, 2.0 * pA * qA, pA * pA},
  }};
}

Mat3 transition_matrix(double rho, double gamma) {
  require_closed_unit(rho, "rho");
  require_closed_unit(gamma, "gamma");
  const double gr = gamma * rho;           // one chromosome moves into A
  const double gs = gamma * (1.0 - rho);   // one chromosome moves into B
  return Mat3{{
      {(1.0 - gr) * (1.0 - gr), 2.0 * gr * (1.0 - gr), gr * gr},
      {gs * (1.0 - gr), (1.0 - gs) * (1.0 - gr) + gr * gs, gr * (1.0 - gs)},
      {gs * gs, 2.0 * gs * (1.0 - gs), (1.0 - gs) * (1.0 - gs)},
  }};
}

Mat3 conditional_transition(int recombinations, double rho) {
  require_closed_unit(rho, "rho");
  const double s = 1.0 - rho;
  switch (recombinations) {
    case 0:
      return Mat3{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    case 1:
      return Mat3{{{s, rho, 0.0}, {0.5 * s, 0.5, 0.5 * rho}, {0.0, s, rho}}};
    case 2: {
      const Vec3 hwe = initial_state_vector(rho);
      return Mat3{{hwe, hwe, hwe}};
    }
    default:
      throw DomainError(fmt::format("recombination count {} outside {{0,1,2}}", recombinations));
  }
}

Vec3 initial_state_vector(double rho) {
  require_closed_unit(rho, "rho");
  const double s = 1.0 - rho;
  return Vec3{s * s, 2.0 * rho * s, rho * rho};
}

double recombination_weight(int r, double gamma) {
  const double g = 1.0 - gamma;
  switch (r) {
    case 0: return g * g;
    case 1: return 2.0 * gamma * g;
    case 2: return gamma * gamma;
    default: return 0.0;
  }
}

}  // namespace gleam
