#include "gleam/qnm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "gleam/error.hpp"
#include "gleam/simgen.hpp"

namespace gleam {

std::string_view to_string(BfStatus status) {
  switch (status) {
    case BfStatus::Ok: return "ok";
    case BfStatus::FitFailed: return "fit_failed";
    case BfStatus::NoValidDraws: return "no_valid_draws";
  }
  return "unknown";
}

double qnm_density(const Eigen::VectorXd& beta, const QnmSpec& spec) {
  const Eigen::Index p = beta.size();
  if (p == 0) throw DomainError("coefficient vector is empty");
  if (!(spec.tau > 0.0) || !(spec.sigma2 > 0.0) || !(spec.subjects > 0.0))
    throw DomainError("QNM prior needs tau, sigma2 and subject count > 0");
  if (spec.Sigma.rows() != p || spec.Sigma.cols() != p) throw DomainError("Sigma dimension does not match beta");
  if (!spec.Sigma.isApprox(spec.Sigma.transpose())) throw DomainError("Sigma is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(spec.Sigma);
  if (llt.info() != Eigen::Success) throw DomainError("Sigma is not positive definite");

  const double scale = spec.subjects * spec.tau * spec.sigma2;
  const double quad = beta.dot(llt.solve(beta));  // beta' Sigma^-1 beta
  const Eigen::MatrixXd L = llt.matrixL();
  const double log_det_sigma = 2.0 * L.diagonal().array().log().sum();
  const double dp = static_cast<double>(p);
  const double log_normal =
      -0.5 * dp * std::log(2.0 * std::numbers::pi * scale) - 0.5 * log_det_sigma - 0.5 * quad / scale;
  return quad / (scale * dp) * std::exp(log_normal);
}

double wald_statistic(const FitResult& fit) {
  Eigen::LLT<Eigen::MatrixXd> llt(fit.Sigma_beta);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  return fit.beta_hat.dot(llt.solve(fit.beta_hat));
}

double log_bf_closed_form(double wald, std::size_t p, double g) {
  const double dp = static_cast<double>(p);
  const double T = g / (1.0 + g) * wald;
  return std::log(dp + T) - std::log(dp) - (0.5 * dp + 1.0) * std::log1p(g) + 0.5 * T;
}

double estimate_tau_eb(double wald, std::size_t p, std::size_t subjects) {
  const double n = static_cast<double>(subjects);
  auto objective = [&](double log_tau) { return log_bf_closed_form(wald, p, n * std::exp(log_tau)); };

  // The objective is concave in g / (1 + g), hence unimodal in log tau.
  const double lo0 = std::log(kTauHatMin);
  const double hi0 = std::log(kTauHatMax);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo0, b = hi0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > 1e-8) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  const double u = 0.5 * (a + b);
  if (u - lo0 < 1e-6 || objective(lo0) >= objective(u)) return kTauHatMin;
  if (hi0 - u < 1e-6 || objective(hi0) >= objective(u)) return kTauHatMax;
  return std::exp(u);
}

double estimate_tau_eb(const FitResult& fit, std::size_t subjects) {
  const double w = wald_statistic(fit);
  if (!std::isfinite(w)) throw DomainError("fit has no positive-definite coefficient covariance");
  return estimate_tau_eb(w, fit.dimension(), subjects);
}

BfValue bayes_factor(const FitResult& fit, double tau_hat, std::size_t subjects) {
  BfValue v;
  v.p = fit.dimension();
  v.tau_hat = tau_hat;
  if (!fit.converged()) {
    v.status = BfStatus::FitFailed;
    return v;
  }
  const double w = wald_statistic(fit);
  if (!std::isfinite(w)) {
    v.status = BfStatus::FitFailed;
    return v;
  }
  const double g = static_cast<double>(subjects) * tau_hat;
  v.T = g / (1.0 + g) * w;
  v.log10_bf = log_bf_closed_form(w, v.p, g) / std::numbers::ln10;
  return v;
}

BfValue evaluate_bf(const FitResult& fit, std::size_t subjects) {
  if (!fit.converged()) {
    BfValue v;
    v.p = fit.dimension();
    v.status = BfStatus::FitFailed;
    return v;
  }
  const double w = wald_statistic(fit);
  if (!std::isfinite(w)) {
    BfValue v;
    v.p = fit.dimension();
    v.status = BfStatus::FitFailed;
    return v;
  }
  return bayes_factor(fit, estimate_tau_eb(w, fit.dimension(), subjects), subjects);
}

BfValue average_bf(std::span<const BfValue> values, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != values.size())
    throw AlignmentError("weight count does not match Bayes factor count");
  BfValue out;
  out.status = BfStatus::NoValidDraws;
  out.draws_used = 0;
  double max_term = -std::numeric_limits<double>::infinity();
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double w = weights.empty() ? 1.0 : weights[k];
    if (w < 0.0 || !std::isfinite(w)) throw DomainError("averaging weights must be finite and nonnegative");
    if (values[k].flagged() || w == 0.0) continue;
    max_term = std::max(max_term, values[k].log10_bf * std::numbers::ln10 + std::log(w));
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) {
    if (!values.empty()) out.p = values.front().p;
    return out;
  }
  double acc = 0.0, t_acc = 0.0, tau_acc = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double w = weights.empty() ? 1.0 : weights[k];
    if (values[k].flagged() || w == 0.0) continue;
    acc += std::exp(values[k].log10_bf * std::numbers::ln10 + std::log(w) - max_term);
    t_acc += w * values[k].T;
    tau_acc += w * values[k].tau_hat;
    out.p = values[k].p;
    ++out.draws_used;
  }
  out.status = BfStatus::Ok;
  out.log10_bf = (max_term + std::log(acc) - std::log(weight_sum)) / std::numbers::ln10;
  out.T = t_acc / weight_sum;
  out.tau_hat = tau_acc / weight_sum;
  return out;
}

Eigen::MatrixXd ancestry_scale_matrix(const Eigen::MatrixXd& ancestry, bool center) {
  Eigen::MatrixXd S = ancestry;
  if (center) S.rowwise() -= S.colwise().mean();
  const Eigen::MatrixXd sts = S.transpose() * S;
  Eigen::LLT<Eigen::MatrixXd> llt(sts);
  if (llt.info() != Eigen::Success) throw DegenerateDesignError("ancestry cross-product is singular");
  return llt.solve(Eigen::MatrixXd::Identity(sts.rows(), sts.cols()));
}

std::vector<DensityPoint> univariate_density_grid(std::span<const double> frequencies, std::span<const double> taus,
                                                  double sigma2, std::size_t subjects, double beta_max,
                                                  std::size_t points, Rng& rng) {
  if (points < 2) throw DomainError("density grid needs at least two points");
  std::vector<DensityPoint> out;
  for (double pa : frequencies) {
    const std::vector<double> paap{pa};
    const auto S = sample_ancestry_hwe(paap, subjects, rng);
    Eigen::MatrixXd col(subjects, 1);
    for (std::size_t i = 0; i < subjects; ++i) col(i, 0) = S(i, 0);
    QnmSpec spec;
    spec.sigma2 = sigma2;
    spec.subjects = static_cast<double>(subjects);
    spec.Sigma = ancestry_scale_matrix(col, false);
    for (double tau : taus) {
      spec.tau = tau;
      for (std::size_t k = 0; k < points; ++k) {
        const double b = -beta_max + 2.0 * beta_max * static_cast<double>(k) / static_cast<double>(points - 1);
        Eigen::VectorXd beta(1);
        beta << b;
        out.push_back({pa, tau, b, 0.0, qnm_density(beta, spec)});
      }
    }
  }
  return out;
}

std::vector<DensityPoint> bivariate_density_grid(double frequency, std::span<const double> latent_correlations,
                                                 double tau_sigma2, std::size_t subjects, double beta_max,
                                                 std::size_t points, Rng& rng) {
  if (points < 2) throw DomainError("density grid needs at least two points");
  std::vector<DensityPoint> out;
  for (double rho : latent_correlations) {
    const auto pairs = sample_correlated_ancestry(frequency, rho, subjects, rng);
    Eigen::MatrixXd S(subjects, 2);
    for (std::size_t i = 0; i < subjects; ++i) {
      S(i, 0) = pairs(i, 0);
      S(i, 1) = pairs(i, 1);
    }
    QnmSpec spec;
    spec.tau = tau_sigma2;  // only the product tau sigma2 matters here
    spec.sigma2 = 1.0;
    spec.subjects = static_cast<double>(subjects);
    spec.Sigma = ancestry_scale_matrix(S, true);
    for (std::size_t a = 0; a < points; ++a) {
      for (std::size_t c = 0; c < points; ++c) {
        const double step = 2.0 * beta_max / static_cast<double>(points - 1);
        Eigen::VectorXd beta(2);
        beta << -beta_max + step * static_cast<double>(a), -beta_max + step * static_cast<double>(c);
        out.push_back({rho, tau_sigma2, beta[0], beta[1], qnm_density(beta, spec)});
      }
    }
  }
  return out;
}

}  // namespace gleam
