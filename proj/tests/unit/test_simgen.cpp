#include "doctest.h"

#include <cmath>

#include "gleam/error.hpp"
#include "gleam/mapping.hpp"
#include "gleam/simgen.hpp"

using namespace gleam;

namespace {

std::array<double, 3> category_freq(const Eigen::VectorXd& col) {
  std::array<double, 3> f{0, 0, 0};
  for (Eigen::Index i = 0; i < col.size(); ++i) f[static_cast<int>(col[i])] += 1.0 / double(col.size());
  return f;
}

// Chi-square goodness of fit with two degrees of freedom, where the upper
// tail is exp(-x / 2).
double gof_pvalue(const Eigen::VectorXd& col, double p) {
  const double n = double(col.size());
  const double e[3] = {(1 - p) * (1 - p) * n, 2 * p * (1 - p) * n, p * p * n};
  const auto f = category_freq(col);
  double x = 0.0;
  for (int k = 0; k < 3; ++k) x += std::pow(f[k] * n - e[k], 2) / e[k];
  return std::exp(-x / 2);
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd x = a.array() - a.mean(), y = b.array() - b.mean();
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

}  // namespace

TEST_CASE("HWE ancestry sampling") {
  Rng rng = make_stream(400, {});
  const std::vector<double> p{1.0, 0.5, 0.8321, 0.0};
  const auto S = sample_ancestry_hwe(p, 100000, rng);
  CHECK((S.col(0).array() == 2.0).all());
  CHECK((S.col(3).array() == 0.0).all());
  const auto f = category_freq(S.col(1));
  CHECK(std::abs(f[0] - 0.25) < 0.01);
  CHECK(std::abs(f[1] - 0.5) < 0.01);
  CHECK(std::abs(f[2] - 0.25) < 0.01);
  CHECK(std::abs(S.col(2).mean() - 2 * 0.8321) < 0.01);
  CHECK(gof_pvalue(S.col(2), 0.8321) > 0.001);
}

TEST_CASE("latent-Gaussian ancestry pairs") {
  Rng rng = make_stream(401, {});
  const auto zero = sample_correlated_ancestry(0.8, 0.0, 100000, rng);
  CHECK(std::abs(pearson(zero.col(0), zero.col(1))) < 0.02);
  for (double rho : {0.0, 0.25, 0.75}) {
    CAPTURE(rho);
    const auto S = sample_correlated_ancestry(0.8, rho, 100000, rng);
    CHECK(gof_pvalue(S.col(0), 0.8) > 0.001);
    CHECK(gof_pvalue(S.col(1), 0.8) > 0.001);
  }
  const auto lo = sample_correlated_ancestry(0.8, 0.25, 100000, rng);
  const auto hi = sample_correlated_ancestry(0.8, 0.75, 100000, rng);
  CHECK(pearson(hi.col(0), hi.col(1)) > pearson(lo.col(0), lo.col(1)));
}

TEST_CASE("effect sizes") {
  // Continuous: the largest c times the top of the PAAP range.
  CHECK(std::abs(0.4 * 0.8817 - 0.3527) < 5e-5);
  SimScenario s;
  CHECK(s.causal_paap_high == 0.8817);
  CHECK(s.causal_paap_low == 0.8321);
  // Binary: an odds ratio of 1.8537 corresponds to c = 0.7 at the top of the range.
  CHECK(std::abs(std::exp(0.7 * 0.8817) - 1.8537) < 5e-4);
}

TEST_CASE("trait simulation") {
  Rng base = make_stream(402, {});
  const std::vector<double> p(5, 0.8);
  const auto S = sample_ancestry_hwe(p, 500, base);

  SUBCASE("zero effects reproduce the null generator") {
    for (auto kind : {TraitKind::Continuous, TraitKind::Binary, TraitKind::Count}) {
      Rng a = make_stream(403, {}), b = make_stream(403, {});
      const std::vector<CausalEffect> zero{{2, 0.0}};
      const auto t0 = simulate_traits(S, {}, 0.5, kind, a);
      const auto t1 = simulate_traits(S, zero, 0.5, kind, b);
      CHECK(t0.y == t1.y);
      CHECK(t0.covariates == t1.covariates);
      CHECK(t0.covariate_names == std::vector<std::string>{"E"});
      CHECK(t0.kind == kind);
      CHECK_NOTHROW(t0.validate());
    }
  }
  SUBCASE("null continuous variance") {
    double var = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
      Rng rng = make_stream(404, {std::uint64_t(r)});
      const std::vector<double> q(1, 0.8);
      const auto S1 = sample_ancestry_hwe(q, 1000, rng);
      const auto t = simulate_traits(S1, {}, 1.0, TraitKind::Continuous, rng);
      CHECK(std::abs(t.y.mean()) < 0.15);
      var += (t.y.array() - t.y.mean()).square().sum() / 999.0 / reps;
    }
    CHECK(std::abs(var / 2.0 - 1.0) < 0.05);
  }
  SUBCASE("effects shift the response") {
    Rng rng = make_stream(405, {});
    const std::vector<CausalEffect> eff{{1, 0.8}};
    const auto t = simulate_traits(S, eff, 0.0, TraitKind::Continuous, rng);
    const auto fit = fit_glm(t, center_ancestries(S.col(1), {1}));
    CHECK(std::abs(fit.beta_hat[0] - 0.8) < 4 * std::sqrt(fit.Sigma_beta(0, 0)));
  }
}

TEST_CASE("artificial chromosome") {
  Rng rng = make_stream(406, {});
  const BlockGenerator g;
  const auto ch = build_artificial_chromosome(g, 1000, rng);
  CHECK(ch.loci() == 102);
  CHECK(ch.regions[ch.locus1] == Region::Locus1);
  CHECK(ch.regions[ch.locus2] == Region::Locus2);
  CHECK(ch.segment[0] == 0);
  CHECK(ch.segment[101] == 1);
  CHECK(ch.position_mb[50] == doctest::Approx(139.50));
  CHECK(ch.position_mb[101] == doctest::Approx(114.88));
  CHECK(std::abs(ch.ancestry.col(ch.locus1).mean() / 2 - kCausalPaap) < 0.03);

  // Labels follow the |r| > 0.12 rule.
  for (std::size_t j = 0; j < ch.loci(); ++j) {
    if (j == ch.locus1 || j == ch.locus2) continue;
    const double r1 = std::abs(pearson(ch.ancestry.col(j), ch.ancestry.col(ch.locus1)));
    const double r2 = std::abs(pearson(ch.ancestry.col(j), ch.ancestry.col(ch.locus2)));
    const Region expect = r1 > kRegionThreshold && r1 >= r2   ? Region::Reg1
                          : r2 > kRegionThreshold             ? Region::Reg2
                                                              : Region::Reg3;
    CHECK(ch.regions[j] == expect);
  }
}

TEST_CASE("artificial chromosome region sizes are calibrated") {
  const BlockGenerator g;
  double reg1 = 0.0, reg2 = 0.0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(407, {std::uint64_t(r)});
    const auto ch = build_artificial_chromosome(g, 1000, rng);
    reg1 += double(ch.region_size(Region::Reg1)) / reps;
    reg2 += double(ch.region_size(Region::Reg2)) / reps;
  }
  CAPTURE(reg1);
  CAPTURE(reg2);
  CHECK(std::abs(reg1 / 42.0 - 1.0) <= 0.2);
  CHECK(std::abs(reg2 / 35.0 - 1.0) <= 0.2);
}

TEST_CASE("artificial chromosome from user draws") {
  Rng rng = make_stream(408, {});
  std::vector<double> p(120, 0.7);
  const auto src = as_draws(sample_ancestry_hwe(p, 50, rng));
  const auto ch = build_artificial_chromosome(src, 40);
  CHECK(ch.loci() == 102);
  CHECK(ch.ancestry.rows() == 40);
  CHECK(ch.regions[25] == Region::Locus1);
  std::vector<double> few(80, 0.7);
  const auto small = as_draws(sample_ancestry_hwe(few, 50, rng));
  CHECK_THROWS_AS(build_artificial_chromosome(small, 40), DomainError);
  CHECK_THROWS_AS(build_artificial_chromosome(src, 60), DomainError);
}

TEST_CASE("scenarios") {
  SimScenario s;
  s.kind = ScenarioKind::SingleLocus;
  s.subjects = 120;
  s.loci = 15;
  s.c = 0.3;
  s.alpha = 1.0;
  s.trait = TraitKind::Binary;
  s.replicates = 4;
  s.seed = 77;
  s.paap = std::vector<double>(15, 0.75);

  SUBCASE("JSON round trip") {
    CHECK(scenario_from_json(scenario_to_json(s)) == s);
    SimScenario m;
    m.kind = ScenarioKind::Multilocus;
    CHECK(scenario_from_json(scenario_to_json(m)) == m);
  }
  SUBCASE("validation") {
    auto bad = s;
    bad.c = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.paap[3] = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.paap.pop_back();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS(scenario_from_json("{\"kind\": \"bogus\"}"));
    CHECK_THROWS(parse_scenario_kind("twolocus"));
  }
  SUBCASE("replicates are deterministic and distinct") {
    const auto a = generate_replicate(s, 2), b = generate_replicate(s, 2), c = generate_replicate(s, 3);
    CHECK(a.ancestry == b.ancestry);
    CHECK(a.trait.y == b.trait.y);
    CHECK_FALSE(a.ancestry == c.ancestry);
    REQUIRE(a.causal.size() == 1);
    const double pa = a.paap[a.causal[0].locus];
    CHECK(pa >= s.causal_paap_low);
    CHECK(pa <= s.causal_paap_high);
    CHECK(a.causal[0].beta == doctest::Approx(0.3 * pa));
    CHECK(a.trait.kind == TraitKind::Binary);
  }
  SUBCASE("null replicates have no causal loci") {
    auto n = s;
    n.kind = ScenarioKind::Null;
    const auto d = generate_replicate(n, 0);
    CHECK(d.causal.empty());
    CHECK(d.ancestry.cols() == 15);
    n.paap.clear();
    const auto e = generate_replicate(n, 0);
    for (double p : e.paap) {
      CHECK(p >= n.paap_low);
      CHECK(p <= n.paap_high);
    }
  }
  SUBCASE("multilocus replicates") {
    SimScenario m;
    m.kind = ScenarioKind::Multilocus;
    m.subjects = 300;
    m.c = 0.7;
    const auto d = generate_replicate(m, 0);
    CHECK(d.ancestry.cols() == 102);
    REQUIRE(d.causal.size() == 2);
    CHECK(d.causal[0].locus == 25);
    CHECK(d.causal[1].locus == 76);
    CHECK(d.regions.size() == 102);
  }
}

TEST_CASE("draw wrapper") {
  AncestryMatrix S(2, 3);
  S << 0, 1, 2, 2, 1, 0;
  const auto d = as_draws(S, 9);
  CHECK(d.count() == 1);
  CHECK(d.seed == 9);
  CHECK(d.subject_ids == std::vector<std::string>{"S00001", "S00002"});
  CHECK(d.marker_ids.back() == "M00003");
  CHECK(d(0, 1, 0) == 2);
  CHECK_NOTHROW(d.validate());
}
