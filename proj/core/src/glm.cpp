#include "gleam/glm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "gleam/error.hpp"

namespace gleam {

std::string_view to_string(TraitKind kind) {
  switch (kind) {
    case TraitKind::Continuous: return "continuous";
    case TraitKind::Binary: return "binary";
    case TraitKind::Count: return "count";
  }
  return "unknown";
}

TraitKind parse_trait_kind(std::string_view text) {
  if (text == "continuous" || text == "quantitative") return TraitKind::Continuous;
  if (text == "binary" || text == "dichotomous") return TraitKind::Binary;
  if (text == "count" || text == "poisson") return TraitKind::Count;
  throw ConfigError(fmt::format("unknown trait kind '{}'", text));
}

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Ok: return "ok";
    case FitStatus::NotConverged: return "not_converged";
    case FitStatus::Separation: return "separation";
    case FitStatus::PerfectFit: return "perfect_fit";
  }
  return "unknown";
}

void TraitData::validate() const {
  const Eigen::Index n = y.size();
  if (covariates.size() > 0 && covariates.rows() != n)
    throw AlignmentError(fmt::format("covariate matrix has {} rows for {} responses", covariates.rows(), n));
  if (!covariate_names.empty() && static_cast<Eigen::Index>(covariate_names.size()) != covariates.cols())
    throw AlignmentError("covariate name count does not match covariate columns");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = y[i];
    if (!std::isfinite(v)) throw DomainError(fmt::format("response {} is not finite", i));
    if (kind == TraitKind::Binary && v != 0.0 && v != 1.0)
      throw DomainError(fmt::format("binary response {} has value {}", i, v));
    if (kind == TraitKind::Count && (v < 0.0 || v != std::floor(v)))
      throw DomainError(fmt::format("count response {} has value {}", i, v));
  }
  if (covariates.size() > 0 && !covariates.allFinite()) throw DomainError("covariates contain non-finite values");
}

AncestryDesign center_ancestries(const Eigen::MatrixXd& raw, std::vector<std::size_t> loci) {
  if (static_cast<Eigen::Index>(loci.size()) != raw.cols())
    throw AlignmentError("locus id count does not match ancestry columns");
  AncestryDesign d;
  d.S = raw;
  d.loci = std::move(loci);
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    for (Eigen::Index r = 0; r < raw.rows(); ++r) {
      const double v = raw(r, c);
      if (v != 0.0 && v != 1.0 && v != 2.0)
        throw DomainError(fmt::format("ancestry value {} at row {} of locus {}", v, r, d.loci[c]));
    }
    const double mean = raw.col(c).mean();
    if ((raw.col(c).array() == raw(0, c)).all())
      throw DegenerateDesignError(fmt::format("ancestry at locus {} is constant", d.loci[c]));
    d.S.col(c).array() -= mean;
  }
  return d;
}

namespace {

Eigen::MatrixXd build_design(const TraitData& trait, const Eigen::MatrixXd* S) {
  const Eigen::Index n = trait.y.size();
  const Eigen::Index q = trait.covariates.cols();
  const Eigen::Index p = S ? S->cols() : 0;
  Eigen::MatrixXd X(n, 1 + q + p);
  X.col(0).setOnes();
  if (q > 0) X.middleCols(1, q) = trait.covariates;
  if (p > 0) X.rightCols(p) = *S;
  return X;
}

void require_full_rank(const Eigen::MatrixXd& X, const std::vector<std::size_t>& loci) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    std::string ids;
    for (auto l : loci) ids += (ids.empty() ? "" : ",") + std::to_string(l);
    throw DegenerateDesignError(
        fmt::format("design with loci [{}] is rank deficient ({} of {} columns)", ids, qr.rank(), X.cols()));
  }
}

struct SubFit {
  Eigen::VectorXd coef;
  Eigen::MatrixXd cov;  // estimated covariance of coef
  double loglik = 0.0;
  double sigma2 = 1.0;
  FitStatus status = FitStatus::Ok;
  int iterations = 0;
};

double gaussian_profile_loglik(double rss, Eigen::Index n) {
  if (rss <= 0.0) return std::numeric_limits<double>::infinity();
  const double s2 = rss / static_cast<double>(n);
  return -0.5 * static_cast<double>(n) * (std::log(2.0 * std::numbers::pi * s2) + 1.0);
}

SubFit fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  SubFit f;
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  const Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::LLT<Eigen::MatrixXd> llt(xtx);
  if (llt.info() != Eigen::Success) throw DegenerateDesignError("normal equations are not positive definite");
  f.coef = llt.solve(X.transpose() * y);
  const Eigen::VectorXd resid = y - X * f.coef;
  const double rss = resid.squaredNorm();
  const double tss = (y.array() - y.mean()).matrix().squaredNorm();
  const double df = static_cast<double>(n - k);
  const bool perfect = rss <= 1e-24 * std::max(1.0, tss);
  f.sigma2 = perfect ? 0.0 : rss / df;
  f.cov = f.sigma2 * llt.solve(Eigen::MatrixXd::Identity(k, k));
  f.loglik = perfect ? std::numeric_limits<double>::infinity() : gaussian_profile_loglik(rss, n);
  f.status = perfect ? FitStatus::PerfectFit : FitStatus::Ok;
  return f;
}

double mean_function(TraitKind kind, double eta) {
  if (kind == TraitKind::Binary) return 1.0 / (1.0 + std::exp(-eta));
  return std::exp(eta);
}

double irls_loglik(TraitKind kind, const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e = eta[i];
    if (kind == TraitKind::Binary) {
      // y e - log(1 + exp(e)), evaluated without overflow
      const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      ll += y[i] * e - softplus;
    } else {
      ll += y[i] * e - std::exp(e) - std::lgamma(y[i] + 1.0);
    }
  }
  return ll;
}

SubFit fit_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, TraitKind kind) {
  SubFit f;
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  f.coef = Eigen::VectorXd::Zero(k);
  const double ybar = y.mean();
  if (kind == TraitKind::Binary) {
    if (ybar <= 0.0 || ybar >= 1.0) {
      f.status = FitStatus::Separation;
      f.cov = Eigen::MatrixXd::Zero(k, k);
      f.loglik = 0.0;
      return f;
    }
    f.coef[0] = std::log(ybar / (1.0 - ybar));
  } else {
    if (ybar <= 0.0) {
      f.status = FitStatus::Separation;
      f.cov = Eigen::MatrixXd::Zero(k, k);
      f.loglik = 0.0;
      return f;
    }
    f.coef[0] = std::log(ybar);
  }

  Eigen::VectorXd eta = X * f.coef;
  double ll = irls_loglik(kind, y, eta);
  Eigen::VectorXd mu(n), w(n), z(n);
  bool converged = false;
  for (int it = 1; it <= kIrlsMaxIterations; ++it) {
    f.iterations = it;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = mean_function(kind, eta[i]);
      w[i] = kind == TraitKind::Binary ? mu[i] * (1.0 - mu[i]) : mu[i];
      w[i] = std::max(w[i], 1e-300);
      z[i] = eta[i] + (y[i] - mu[i]) / w[i];
    }
    const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
      f.status = FitStatus::Separation;
      break;
    }
    const Eigen::VectorXd target = llt.solve(X.transpose() * (w.asDiagonal() * z));
    Eigen::VectorXd step = target - f.coef;

    // Step halving keeps the log-likelihood monotone.
    double ll_new = 0.0;
    Eigen::VectorXd coef_new;
    for (int h = 0; h < 30; ++h) {
      coef_new = f.coef + step;
      eta = X * coef_new;
      ll_new = irls_loglik(kind, y, eta);
      if (std::isfinite(ll_new) && ll_new >= ll - 1e-12 * std::abs(ll)) break;
      step *= 0.5;
    }
    const double change = std::abs(ll_new - ll) / (std::abs(ll_new) + 0.1);
    f.coef = coef_new;
    ll = ll_new;
    if ((k > 1 && f.coef.tail(k - 1).cwiseAbs().maxCoeff() > kSeparationBound) ||
        (kind == TraitKind::Binary && std::abs(f.coef[0]) > kSeparationBound)) {
      f.status = FitStatus::Separation;
      break;
    }
    if (change < kIrlsTolerance) {
      converged = true;
      break;
    }
  }
  if (f.status == FitStatus::Ok && !converged) f.status = FitStatus::NotConverged;

  eta = X * f.coef;
  for (Eigen::Index i = 0; i < n; ++i) {
    mu[i] = mean_function(kind, eta[i]);
    w[i] = kind == TraitKind::Binary ? mu[i] * (1.0 - mu[i]) : mu[i];
  }
  const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() == Eigen::Success) {
    f.cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
  } else {
    f.cov = Eigen::MatrixXd::Zero(k, k);
    if (f.status == FitStatus::Ok) f.status = FitStatus::Separation;
  }
  f.loglik = irls_loglik(kind, y, eta);
  f.sigma2 = 1.0;
  return f;
}

SubFit fit_any(const Eigen::MatrixXd& X, const TraitData& trait) {
  if (trait.kind == TraitKind::Continuous) return fit_least_squares(X, trait.y);
  return fit_irls(X, trait.y, trait.kind);
}

}  // namespace

FitResult fit_glm(const TraitData& trait, const AncestryDesign& design) {
  const Eigen::Index n = trait.y.size();
  const Eigen::Index q = trait.covariates.cols();
  const Eigen::Index p = design.S.cols();
  if (design.S.rows() != n)
    throw AlignmentError(fmt::format("ancestry design has {} rows for {} responses", design.S.rows(), n));
  if (n <= p + q + 1)
    throw DegenerateDesignError(fmt::format("{} subjects cannot support {} ancestry and {} covariate terms", n, p, q));

  const Eigen::MatrixXd X = build_design(trait, &design.S);
  require_full_rank(X, design.loci);
  const SubFit alt = fit_any(X, trait);

  FitResult r;
  r.n_used = static_cast<std::size_t>(n);
  r.intercept = alt.coef[0];
  r.alpha_hat = alt.coef.segment(1, q);
  r.beta_hat = alt.coef.tail(p);
  r.Sigma_beta = alt.cov.bottomRightCorner(p, p);
  r.sigma2_hat = alt.sigma2;
  r.loglik_alt = alt.loglik;
  r.status = alt.status;
  r.iterations = alt.iterations;

  const Eigen::MatrixXd X0 = build_design(trait, nullptr);
  const SubFit null = fit_any(X0, trait);
  r.loglik_null = null.loglik;
  return r;
}

double glm_loglik(const TraitData& trait, const AncestryDesign& design, const Eigen::VectorXd& coefficients,
                  double sigma2) {
  const Eigen::MatrixXd X = build_design(trait, &design.S);
  if (coefficients.size() != X.cols()) throw AlignmentError("coefficient vector has the wrong length");
  const Eigen::VectorXd eta = X * coefficients;
  if (trait.kind == TraitKind::Continuous) {
    const double rss = (trait.y - eta).squaredNorm();
    const double n = static_cast<double>(trait.y.size());
    return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) - 0.5 * rss / sigma2;
  }
  return irls_loglik(trait.kind, trait.y, eta);
}

}  // namespace gleam
