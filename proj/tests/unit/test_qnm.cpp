#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "gleam/error.hpp"
#include "gleam/qnm.hpp"
#include "gleam/simgen.hpp"

using namespace gleam;

namespace {

QnmSpec spec1(double tau, double sigma2, double Sigma, double I) {
  QnmSpec s;
  s.tau = tau;
  s.sigma2 = sigma2;
  s.subjects = I;
  s.Sigma = Eigen::MatrixXd::Constant(1, 1, Sigma);
  return s;
}

// Trapezoid rule over [-L, L] for p = 1.
double integrate1(const QnmSpec& s) {
  const double v = s.subjects * s.tau * s.sigma2 * s.Sigma(0, 0);
  const double L = 12.0 * std::sqrt(v);
  const int n = 20001;
  const double h = 2 * L / (n - 1);
  double acc = 0.0;
  Eigen::VectorXd b(1);
  for (int k = 0; k < n; ++k) {
    b[0] = -L + h * k;
    acc += (k == 0 || k == n - 1 ? 0.5 : 1.0) * qnm_density(b, s);
  }
  return acc * h;
}

double integrate2(const QnmSpec& s) {
  const double scale = s.subjects * s.tau * s.sigma2;
  const double L1 = 12.0 * std::sqrt(scale * s.Sigma(0, 0)), L2 = 12.0 * std::sqrt(scale * s.Sigma(1, 1));
  const int n = 801;
  const double h1 = 2 * L1 / (n - 1), h2 = 2 * L2 / (n - 1);
  double acc = 0.0;
  Eigen::VectorXd b(2);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      b << -L1 + h1 * a, -L2 + h2 * c;
      const double w = (a == 0 || a == n - 1 ? 0.5 : 1.0) * (c == 0 || c == n - 1 ? 0.5 : 1.0);
      acc += w * qnm_density(b, s);
    }
  return acc * h1 * h2;
}

FitResult synthetic_fit(double beta_hat, double var) {
  FitResult f;
  f.beta_hat = Eigen::VectorXd::Constant(1, beta_hat);
  f.Sigma_beta = Eigen::MatrixXd::Constant(1, 1, var);
  f.alpha_hat.resize(0);
  return f;
}

BfValue bf_with(double log10_bf, BfStatus status = BfStatus::Ok) {
  BfValue v;
  v.log10_bf = log10_bf;
  v.p = 1;
  v.status = status;
  return v;
}

}  // namespace

TEST_CASE("QNM density basics") {
  const auto s = spec1(0.01, 1.0, 0.004, 1000);
  CHECK(qnm_density(Eigen::VectorXd::Zero(1), s) == 0.0);

  // The mode of b^2 exp(-b^2 / 2v) sits at sqrt(2 v).
  const double v = 1000 * 0.01 * 0.004;
  const double mode = std::sqrt(2 * v);
  Eigen::VectorXd b(1);
  b[0] = mode;
  const double at = qnm_density(b, s);
  for (double d : {-1e-3, 1e-3}) {
    b[0] = mode + d;
    CHECK(qnm_density(b, s) < at);
    b[0] = -mode + d;
    CHECK(qnm_density(b, s) < at);
  }

  QnmSpec bad = s;
  bad.Sigma(0, 0) = -1.0;
  CHECK_THROWS_AS(qnm_density(Eigen::VectorXd::Ones(1), bad), DomainError);
  bad = s;
  bad.tau = 0.0;
  CHECK_THROWS_AS(qnm_density(Eigen::VectorXd::Ones(1), bad), DomainError);
  QnmSpec asym;
  asym.Sigma = Eigen::Matrix2d{{1.0, 0.5}, {0.1, 1.0}};
  CHECK_THROWS_AS(qnm_density(Eigen::VectorXd::Ones(2), asym), DomainError);
}

TEST_CASE("QNM density integrates to one") {
  Rng rng = make_stream(200, {});
  for (int rep = 0; rep < 5; ++rep) {
    const double tau = std::exp(std::log(1e-4) + draw_uniform(rng) * std::log(1e4));
    const double sigma2 = 0.2 + 3 * draw_uniform(rng);
    const double I = 50 + 2000 * draw_uniform(rng);
    CHECK(std::abs(integrate1(spec1(tau, sigma2, 0.001 + draw_uniform(rng), I)) - 1.0) < 1e-3);

    QnmSpec s2;
    s2.tau = tau;
    s2.sigma2 = sigma2;
    s2.subjects = I;
    const double r = -0.9 + 1.8 * draw_uniform(rng);
    const double a = 0.5 + draw_uniform(rng), c = 0.5 + draw_uniform(rng);
    s2.Sigma = Eigen::Matrix2d{{a, r * std::sqrt(a * c)}, {r * std::sqrt(a * c), c}};
    CHECK(std::abs(integrate2(s2) - 1.0) < 1e-3);
  }
}

TEST_CASE("closed-form Bayes factor") {
  // T = 0, p = 1, g = 9.
  CHECK(std::exp(log_bf_closed_form(0.0, 1, 9.0)) == doctest::Approx(std::pow(10.0, -1.5)).epsilon(1e-12));
  auto f = synthetic_fit(0.0, 0.01);
  const auto v = bayes_factor(f, 9.0 / 500, 500);
  CHECK(v.log10_bf == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(v.T == 0.0);

  double prev = -INFINITY;
  for (double w = 0.0; w < 50.0; w += 0.5) {
    const double lb = log_bf_closed_form(w, 2, 25.0);
    CHECK(lb > prev);
    prev = lb;
  }
  f.status = FitStatus::NotConverged;
  CHECK(bayes_factor(f, 0.01, 500).flagged());
  f = synthetic_fit(1.0, 0.01);
  f.Sigma_beta(0, 0) = -1.0;
  CHECK(evaluate_bf(f, 500).flagged());
}

TEST_CASE("empirical-Bayes tau") {
  SUBCASE("zero estimate snaps to the lower bound") {
    const auto f = synthetic_fit(0.0, 0.01);
    CHECK(estimate_tau_eb(f, 500) == kTauHatMin);
    const auto v = evaluate_bf(f, 500);
    CHECK(v.log10_bf <= 0.0);
  }
  SUBCASE("golden section matches a grid argmax") {
    for (double z : {1.5, 2.5, 4.0, 9.0}) {
      CAPTURE(z);
      const std::size_t I = 500;
      const auto f = synthetic_fit(z * 0.05, 0.0025);
      const double w = wald_statistic(f);
      const int n = 10000;
      const double lo = std::log(kTauHatMin), hi = std::log(kTauHatMax);
      const double step = (hi - lo) / (n - 1);
      double best = -INFINITY, arg = lo;
      for (int k = 0; k < n; ++k) {
        const double lt = lo + step * k;
        const double val = log_bf_closed_form(w, 1, double(I) * std::exp(lt));
        if (val > best) {
          best = val;
          arg = lt;
        }
      }
      const double got = std::log(estimate_tau_eb(f, I));
      CHECK(std::abs(got - arg) <= step);
    }
  }
  SUBCASE("large Wald statistic pushes toward the upper part of the range") {
    const double t1 = estimate_tau_eb(25.0, 1, 500), t2 = estimate_tau_eb(400.0, 1, 500);
    CHECK(t2 > t1);
    CHECK(t2 <= kTauHatMax);
  }
}

TEST_CASE("closed form agrees with quadrature of the likelihood ratio") {
  // Continuous trait, one strong locus, I = 500. The oracle integrates
  // L(beta) / L(0) against the prior, profiling the intercept and covariate at
  // each beta with sigma2 held at its estimate.
  for (std::uint64_t seed : {1, 2, 3}) {
    Rng rng = make_stream(201, {seed});
    const std::size_t I = 500;
    const std::vector<double> paap{0.8};
    const auto raw = sample_ancestry_hwe(paap, I, rng);
    const auto d = center_ancestries(raw, {0});
    TraitData t;
    t.covariates.resize(I, 1);
    t.y.resize(I);
    for (std::size_t i = 0; i < I; ++i) {
      t.covariates(i, 0) = draw_normal(rng);
      t.y[i] = 0.5 + 0.25 * d.S(i, 0) + 0.3 * t.covariates(i, 0) + draw_normal(rng);
    }
    const auto f = fit_glm(t, d);
    const auto v = evaluate_bf(f, I);
    REQUIRE_FALSE(v.flagged());

    Eigen::MatrixXd Z(I, 2);
    Z.col(0).setOnes();
    Z.col(1) = t.covariates.col(0);
    const Eigen::MatrixXd proj = Z * (Z.transpose() * Z).inverse() * Z.transpose();
    auto loglik = [&](double b) {
      const Eigen::VectorXd r0 = t.y - d.S.col(0) * b;
      const Eigen::VectorXd r = r0 - proj * r0;
      return -0.5 * r.squaredNorm() / f.sigma2_hat;
    };
    const double l0 = loglik(0.0);
    QnmSpec prior = spec1(v.tau_hat, f.sigma2_hat, f.Sigma_beta(0, 0) / f.sigma2_hat, double(I));
    const double sd = std::sqrt(f.Sigma_beta(0, 0));
    const double L = std::abs(f.beta_hat[0]) + 40 * sd;
    const int n = 40001;
    const double h = 2 * L / (n - 1);
    double acc = 0.0;
    Eigen::VectorXd b(1);
    for (int k = 0; k < n; ++k) {
      b[0] = -L + h * k;
      acc += (k == 0 || k == n - 1 ? 0.5 : 1.0) * std::exp(loglik(b[0]) - l0) * qnm_density(b, prior);
    }
    const double bf_quad = acc * h;
    const double bf_closed = std::pow(10.0, v.log10_bf);
    CAPTURE(bf_quad);
    CAPTURE(bf_closed);
    CHECK(std::abs(bf_closed / bf_quad - 1.0) < 0.05);
  }
}

TEST_CASE("averaging on the Bayes factor scale") {
  const std::vector<BfValue> same{bf_with(1.3), bf_with(1.3), bf_with(1.3)};
  CHECK(average_bf(same).log10_bf == doctest::Approx(1.3).epsilon(1e-12));

  const std::vector<BfValue> pair{bf_with(1.0), bf_with(3.0)};
  const std::vector<double> first{1.0, 0.0};
  CHECK(average_bf(pair, first).log10_bf == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::pow(10.0, average_bf(pair).log10_bf) == doctest::Approx(505.0).epsilon(1e-12));

  const std::vector<BfValue> huge{bf_with(400.0), bf_with(-400.0)};
  CHECK(average_bf(huge).log10_bf == doctest::Approx(400.0 - std::log10(2.0)).epsilon(1e-12));

  const std::vector<BfValue> some{bf_with(2.0), bf_with(5.0, BfStatus::FitFailed)};
  const auto a = average_bf(some);
  CHECK(a.log10_bf == doctest::Approx(2.0));
  CHECK(a.draws_used == 1);
  const std::vector<BfValue> none{bf_with(2.0, BfStatus::FitFailed)};
  CHECK(average_bf(none).status == BfStatus::NoValidDraws);

  const std::vector<BfValue> one{bf_with(0.7)};
  CHECK(average_bf(one).log10_bf == 0.7);
  const std::vector<double> neg{-1.0};
  CHECK_THROWS_AS(average_bf(one, neg), DomainError);
}

TEST_CASE("univariate density surfaces follow the construction frequency") {
  Rng rng = make_stream(202, {});
  const std::vector<double> freq{0.6, 0.8, 0.99};
  const std::vector<double> tau{0.01};
  const auto grid = univariate_density_grid(freq, tau, 1.0, 1000, 1.0, 2001, rng);
  std::map<double, std::pair<double, double>> mode;  // frequency -> (density, beta)
  for (const auto& p : grid)
    if (p.beta1 > 0 && p.density > mode[p.construction].first) mode[p.construction] = {p.density, p.beta1};
  // A larger construction frequency raises sum S^2, shrinks Sigma and moves the mode inward.
  CHECK(mode[0.6].second > mode[0.8].second);
  CHECK(mode[0.8].second > mode[0.99].second);
}

TEST_CASE("bivariate density surfaces follow the ancestry correlation") {
  Rng rng = make_stream(203, {});
  const std::vector<double> corr{0.0, 0.25, 0.75};
  const auto grid = bivariate_density_grid(0.8, corr, 0.01, 1000, 0.5, 101, rng);
  std::map<double, double> diag, anti;
  for (const auto& p : grid) {
    if (std::abs(p.beta1 - 0.05) > 1e-9) continue;
    if (std::abs(p.beta2 - 0.05) < 1e-9) diag[p.construction] = p.density;
    if (std::abs(p.beta2 + 0.05) < 1e-9) anti[p.construction] = p.density;
  }
  REQUIRE(diag.size() == 3);
  const double r0 = diag[0.0] / anti[0.0], r1 = diag[0.25] / anti[0.25], r2 = diag[0.75] / anti[0.75];
  CHECK(r0 < r1);
  CHECK(r1 < r2);
}

TEST_CASE("ancestry scale matrix") {
  Eigen::MatrixXd S(3, 1);
  S << 1, 1, 2;
  CHECK(ancestry_scale_matrix(S, false)(0, 0) == doctest::Approx(1.0 / 6.0));
  CHECK(ancestry_scale_matrix(S, true)(0, 0) == doctest::Approx(1.0 / (2.0 / 3.0)));
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(3, 1);
  CHECK_THROWS_AS(ancestry_scale_matrix(c, true), DegenerateDesignError);
}
