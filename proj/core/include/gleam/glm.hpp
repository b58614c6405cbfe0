#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gleam {

enum class TraitKind { Continuous, Binary, Count };

std::string_view to_string(TraitKind kind);
/// Accepts "continuous", "binary", "count" (also "quantitative", "dichotomous", "poisson").
TraitKind parse_trait_kind(std::string_view text);

/// Response vector plus optional covariates, one row per subject.
struct TraitData {
  Eigen::VectorXd y;
  TraitKind kind = TraitKind::Continuous;
  Eigen::MatrixXd covariates;  // subjects × q, q may be 0
  std::vector<std::string> covariate_names;

  std::size_t subjects() const noexcept { return static_cast<std::size_t>(y.size()); }
  /// Throws DomainError for responses that do not match the kind.
  void validate() const;
};

/// Column-centred ancestry design for p loci.
struct AncestryDesign {
  Eigen::MatrixXd S;
  std::vector<std::size_t> loci;

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(S.cols()); }
};

/// Centres each column. Entries must be 0, 1 or 2. A constant column raises
/// DegenerateDesignError naming its locus id.
AncestryDesign center_ancestries(const Eigen::MatrixXd& raw, std::vector<std::size_t> loci);

enum class FitStatus {
  Ok,
  NotConverged,  // IRLS hit the iteration cap
  Separation,    // a logit/log-scale coefficient exceeded kSeparationBound
  PerfectFit,    // continuous residual variance is zero
};

std::string_view to_string(FitStatus status);

inline constexpr double kSeparationBound = 15.0;
inline constexpr int kIrlsMaxIterations = 100;
inline constexpr double kIrlsTolerance = 1e-10;

struct FitResult {
  Eigen::VectorXd beta_hat;    // ancestry coefficients (p)
  Eigen::VectorXd alpha_hat;   // covariate coefficients (q)
  double intercept = 0.0;
  Eigen::MatrixXd Sigma_beta;  // estimated covariance of beta_hat (p × p)
  double sigma2_hat = 1.0;     // residual variance (continuous) or 1
  double loglik_alt = 0.0;
  double loglik_null = 0.0;
  FitStatus status = FitStatus::Ok;
  int iterations = 0;
  std::size_t n_used = 0;

  bool converged() const noexcept { return status == FitStatus::Ok; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(beta_hat.size()); }
};

/// Fits the GLM with intercept, covariates and the ancestry design, plus the
/// nested null model without ancestry terms.
///
/// Continuous traits use exact least squares with sigma2 = RSS / (n - p - q - 1);
/// binary (logit) and count (log) traits use IRLS until the relative
/// log-likelihood change falls below 1e-10. Sigma_beta is always the
/// estimated covariance of beta_hat, i.e. the ancestry block of
/// sigma2 (XᵀWX)^-1. Singular information raises DegenerateDesignError;
/// non-convergence and separation are reported through `status`.
FitResult fit_glm(const TraitData& trait, const AncestryDesign& design);

/// Log-likelihood of the model at arbitrary coefficients (intercept,
/// covariates, ancestry order). Continuous traits use the given sigma2.
double glm_loglik(const TraitData& trait, const AncestryDesign& design, const Eigen::VectorXd& coefficients,
                  double sigma2 = 1.0);

}  // namespace gleam
