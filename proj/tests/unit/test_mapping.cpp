#include "doctest.h"

#include <cmath>

#include "gleam/error.hpp"
#include "gleam/mapping.hpp"
#include "gleam/simgen.hpp"

using namespace gleam;

namespace {

struct Fixture {
  AncestryMatrix S;
  TraitData trait;
  AncestryDraws draws;
};

// Loci 2 and 5 carry effects; the rest are independent HWE noise.
Fixture make_fixture(std::size_t I, std::size_t J, std::uint64_t seed, double b1 = 0.5, double b2 = 0.4) {
  Rng rng = make_stream(seed, {});
  std::vector<double> paap(J, 0.8);
  Fixture f;
  f.S = sample_ancestry_hwe(paap, I, rng);
  const std::vector<CausalEffect> eff{{2, b1}, {5, b2}};
  f.trait = simulate_traits(f.S, eff, 0.0, TraitKind::Continuous, rng);
  f.draws = as_draws(f.S, seed);
  return f;
}

AncestryDraws two_draws(const AncestryMatrix& a, const AncestryMatrix& b) {
  AncestryDraws d = as_draws(a);
  const auto extra = as_draws(b);
  d.append(extra.draw(0), 2);
  return d;
}

}  // namespace

TEST_CASE("single-draw average equals the single-draw Bayes factor") {
  const auto f = make_fixture(300, 8, 300);
  ScanOptions o;
  const auto scan = stage1_scan(f.draws, f.trait, o);
  REQUIRE(scan.loci.size() == 8);
  for (std::size_t j = 0; j < 8; ++j) {
    const auto fit = fit_glm(f.trait, center_ancestries(f.S.col(j), {j}));
    const auto v = evaluate_bf(fit, 300);
    CHECK(scan.loci[j].log10_bf == v.log10_bf);
    CHECK(scan.loci[j].selected == (v.log10_bf > 2.0));
    CHECK(scan.loci[j].draws_used == 1);
  }
  CHECK(scan.loci[2].selected);
}

TEST_CASE("averaging across draws is on the Bayes factor scale") {
  const auto f = make_fixture(250, 6, 301);
  Rng rng = make_stream(302, {});
  std::vector<double> paap(6, 0.8);
  AncestryMatrix other = f.S;
  other.col(2) = sample_ancestry_hwe(std::vector<double>{0.8}, 250, rng).col(0);
  const auto d = two_draws(f.S, other);
  ScanOptions o;
  const auto scan = stage1_scan(d, f.trait, o);
  const double a = evaluate_bf(fit_glm(f.trait, center_ancestries(f.S.col(2), {2})), 250).log10_bf;
  const double b = evaluate_bf(fit_glm(f.trait, center_ancestries(other.col(2), {2})), 250).log10_bf;
  const double mean = std::log10(0.5 * (std::pow(10.0, a) + std::pow(10.0, b)));
  CHECK(scan.loci[2].log10_bf == doctest::Approx(mean).epsilon(1e-10));
  CHECK(scan.loci[2].draws_used == 2);

  o.weights = {1.0, 0.0};
  CHECK(stage1_scan(d, f.trait, o).loci[2].log10_bf == doctest::Approx(a).epsilon(1e-12));
  o.weights = {1.0};
  CHECK_THROWS(stage1_scan(d, f.trait, o));
}

TEST_CASE("stage 1 thresholds and edge cases") {
  const auto f = make_fixture(200, 6, 303);
  ScanOptions o;
  o.delta = INFINITY;
  const auto none = stage1_scan(f.draws, f.trait, o);
  CHECK(none.selected().empty());
  o.delta = -INFINITY;
  CHECK(stage1_scan(f.draws, f.trait, o).selected().size() == 6);

  TraitData short_trait = f.trait;
  short_trait.y.conservativeResize(150);
  short_trait.covariates.conservativeResize(150, Eigen::NoChange);
  CHECK_THROWS_AS(stage1_scan(f.draws, short_trait, ScanOptions{}), AlignmentError);
}

TEST_CASE("constant loci are skipped with a diagnostic") {
  auto f = make_fixture(200, 6, 304);
  f.S.col(1).setConstant(2.0);
  f.draws = as_draws(f.S);
  const auto scan = stage1_scan(f.draws, f.trait, ScanOptions{});
  CHECK(scan.loci[1].skipped);
  CHECK_FALSE(scan.loci[1].selected);
  CHECK(std::isnan(scan.loci[1].log10_bf));
  CHECK(scan.skipped_count() == 1);
  CHECK_FALSE(scan.diagnostics.empty());
}

TEST_CASE("stage 1 does not depend on the worker count") {
  const auto f = make_fixture(200, 20, 305);
  ScanOptions o;
  const auto a = stage1_scan(f.draws, f.trait, o);
  o.workers = 4;
  const auto b = stage1_scan(f.draws, f.trait, o);
  for (std::size_t j = 0; j < 20; ++j) CHECK(a.loci[j].log10_bf == b.loci[j].log10_bf);
}

TEST_CASE("subset counting") {
  CHECK(subset_count(0, 0) == 0);
  CHECK(subset_count(3, 0) == 7);
  CHECK(subset_count(5, 2) == 15);
  CHECK(subset_count(5, 9) == 31);
  CHECK(subset_count(200, 0) == SIZE_MAX);
}

TEST_CASE("stage 2") {
  const auto f = make_fixture(400, 8, 306, 0.6, 0.6);
  ScanOptions o;

  SUBCASE("empty selection") {
    o.delta = INFINITY;
    auto scan = stage1_scan(f.draws, f.trait, o);
    stage2_joint(scan, f.draws, f.trait, o);
    CHECK(scan.stage2_done);
    CHECK(scan.subsets.empty());
    CHECK(identified_loci(scan).empty());
  }
  SUBCASE("one selected locus passes through") {
    auto scan = stage1_scan(f.draws, f.trait, o);
    for (auto& l : scan.loci) l.selected = l.locus == 2;
    stage2_joint(scan, f.draws, f.trait, o);
    REQUIRE(scan.subsets.size() == 1);
    CHECK(scan.subsets[0].loci == std::vector<std::size_t>{2});
    CHECK(scan.subsets[0].log10_bf == scan.loci[2].log10_bf);
  }
  SUBCASE("subsets are ranked and scored jointly") {
    auto scan = stage1_scan(f.draws, f.trait, o);
    for (auto& l : scan.loci) l.selected = l.locus == 2 || l.locus == 5 || l.locus == 0;
    stage2_joint(scan, f.draws, f.trait, o);
    REQUIRE(scan.subsets.size() == 7);
    for (std::size_t k = 1; k < scan.subsets.size(); ++k)
      CHECK(scan.subsets[k - 1].log10_bf >= scan.subsets[k].log10_bf);
    for (const auto& s : scan.subsets) {
      Eigen::MatrixXd raw(400, s.loci.size());
      for (std::size_t c = 0; c < s.loci.size(); ++c) raw.col(c) = f.S.col(s.loci[c]);
      const auto v = evaluate_bf(fit_glm(f.trait, center_ancestries(raw, s.loci)), 400);
      CHECK(s.log10_bf == v.log10_bf);
    }
    CHECK(scan.subsets.front().loci == std::vector<std::size_t>{2, 5});
    CHECK(identified_loci(scan) == std::vector<std::size_t>{2, 5});

    o.max_cardinality = 1;
    auto again = stage1_scan(f.draws, f.trait, o);
    for (auto& l : again.loci) l.selected = l.locus == 2 || l.locus == 5 || l.locus == 0;
    stage2_joint(again, f.draws, f.trait, o);
    CHECK(again.subsets.size() == 3);
  }
  SUBCASE("subset cap") {
    o.delta = -INFINITY;
    o.subset_cap = 100;
    auto scan = stage1_scan(f.draws, f.trait, o);
    CHECK_THROWS_AS(stage2_joint(scan, f.draws, f.trait, o), ConfigError);
    o.max_cardinality = 2;  // 8 + 28 subsets
    CHECK_NOTHROW(stage2_joint(scan, f.draws, f.trait, o));
    CHECK(scan.subsets.size() == 36);
  }
}

TEST_CASE("identification rule") {
  ScanResult r;
  r.delta = 2.0;
  r.subsets = {{{1, 2}, 9.0, false, 1}, {{1}, 8.0, false, 1}, {{3}, 4.0, false, 1},
               {{2, 3}, 3.0, false, 1}, {{4}, 1.0, false, 1}, {{5}, NAN, true, 0}};
  CHECK(identified_subsets(r) == std::vector<std::size_t>{0, 2});
  CHECK(identified_loci(r) == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("ALD correlation") {
  SUBCASE("independent loci and the diagonal") {
    Rng rng = make_stream(307, {});
    const std::vector<double> paap{0.8, 0.8};
    const auto S = sample_ancestry_hwe(paap, 1000, rng);
    const auto r = ald_correlation(as_draws(S));
    CHECK(r.correlation(0, 0) == 1.0);
    CHECK(r.correlation(1, 1) == 1.0);
    CHECK(std::abs(r.correlation(0, 1)) < 0.05);
    CHECK(r.correlation(0, 1) == r.correlation(1, 0));
  }
  SUBCASE("matches the Pearson oracle with pooled draws") {
    Rng rng = make_stream(308, {});
    std::vector<double> paap(3, 0.6);
    const auto A = sample_ancestry_hwe(paap, 50, rng), B = sample_ancestry_hwe(paap, 50, rng);
    const auto r = ald_correlation(two_draws(A, B));
    Eigen::MatrixXd pooled(100, 3);
    pooled << A, B;
    const Eigen::MatrixXd c = pooled.rowwise() - pooled.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        CHECK(r.correlation(a, b) == doctest::Approx(cov(a, b) / std::sqrt(cov(a, a) * cov(b, b))).epsilon(1e-10));
  }
  SUBCASE("latent correlation ordering") {
    Rng rng = make_stream(309, {});
    const auto lo = sample_correlated_ancestry(0.8, 0.25, 1000, rng);
    const auto hi = sample_correlated_ancestry(0.8, 0.75, 1000, rng);
    CHECK(ald_correlation(as_draws(hi)).correlation(0, 1) > ald_correlation(as_draws(lo)).correlation(0, 1));
  }
  SUBCASE("constant loci") {
    AncestryMatrix S(4, 2);
    S << 0, 1, 1, 1, 2, 1, 1, 1;
    const auto r = ald_correlation(as_draws(S));
    CHECK(r.constant[1] == 1);
    CHECK(r.constant[0] == 0);
    CHECK(r.correlation(0, 1) == 0.0);
    CHECK(r.correlation(1, 1) == 1.0);
  }
}
