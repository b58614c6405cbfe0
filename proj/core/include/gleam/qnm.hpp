#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gleam/glm.hpp"
#include "gleam/rng.hpp"

namespace gleam {

/// Quadratic normal moment prior on p ancestry coefficients:
///
///   f(beta) = beta' Sigma^-1 beta / (I tau sigma2 p) * N_p(beta; 0, I tau sigma2 Sigma)
///
/// so that sigma2 * Sigma is the sampling covariance scale of the coefficient
/// estimator and I is the number of subjects.
struct QnmSpec {
  double tau = 0.01;
  double sigma2 = 1.0;
  Eigen::MatrixXd Sigma;
  double subjects = 1.0;
};

/// Density of the prior at beta. Throws DomainError for an invalid spec.
double qnm_density(const Eigen::VectorXd& beta, const QnmSpec& spec);

/// Bounds of the empirical-Bayes search over tau.
inline constexpr double kTauHatMin = 1e-8;
inline constexpr double kTauHatMax = 1e4;

enum class BfStatus { Ok, FitFailed, NoValidDraws };

std::string_view to_string(BfStatus status);

struct BfValue {
  double log10_bf = 0.0;
  double T = 0.0;
  double tau_hat = 0.0;
  std::size_t p = 0;
  BfStatus status = BfStatus::Ok;
  std::size_t draws_used = 1;

  bool flagged() const noexcept { return status != BfStatus::Ok; }
};

/// W = beta_hat' Sigma_beta^-1 beta_hat, the Wald quadratic form.
double wald_statistic(const FitResult& fit);

/// Natural log of the closed-form Bayes factor
///   BF = (p + T) / (p (1 + g)^(p/2 + 1)) exp(T / 2),  T = g / (1 + g) W,
/// where g = I tau.
double log_bf_closed_form(double wald, std::size_t p, double g);

/// Empirical-Bayes tau: maximizer of the Bayes factor over
/// [kTauHatMin, kTauHatMax], found by golden-section search on log tau.
double estimate_tau_eb(const FitResult& fit, std::size_t subjects);
double estimate_tau_eb(double wald, std::size_t p, std::size_t subjects);

/// Bayes factor at tau_hat. Non-converged fits give a flagged value.
BfValue bayes_factor(const FitResult& fit, double tau_hat, std::size_t subjects);

/// Convenience: tau_hat then bayes_factor, flagging failed fits.
BfValue evaluate_bf(const FitResult& fit, std::size_t subjects);

/// Weighted arithmetic mean of Bayes factors (not log Bayes factors), computed
/// by log-sum-exp. Flagged entries are dropped and the remaining weights
/// renormalized; an empty weight span means equal weights.
BfValue average_bf(std::span<const BfValue> values, std::span<const double> weights = {});

// --- density-surface export -------------------------------------------------

/// Sigma = (S'S)^-1 from an ancestry sample (columns are loci). Columns are
/// centred first when `center` is true.
Eigen::MatrixXd ancestry_scale_matrix(const Eigen::MatrixXd& ancestry, bool center);

struct DensityPoint {
  double construction;  // allele frequency p_a or latent correlation
  double tau;
  double beta1;
  double beta2;  // 0 for univariate grids
  double density;
};

/// Univariate prior densities on a beta grid for each construction frequency:
/// Sigma = (Σ_i S_i^2)^-1 with S_i ~ HWE(p_a), as in a density figure.
std::vector<DensityPoint> univariate_density_grid(std::span<const double> frequencies, std::span<const double> taus,
                                                  double sigma2, std::size_t subjects, double beta_max,
                                                  std::size_t points, Rng& rng);

/// Bivariate prior densities with Sigma = (S'S)^-1 from latent-Gaussian
/// correlated ancestry pairs, one surface per latent correlation.
std::vector<DensityPoint> bivariate_density_grid(double frequency, std::span<const double> latent_correlations,
                                                 double tau_sigma2, std::size_t subjects, double beta_max,
                                                 std::size_t points, Rng& rng);

}  // namespace gleam
