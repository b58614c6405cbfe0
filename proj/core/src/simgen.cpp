#include "gleam/simgen.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "gleam/error.hpp"
#include "json.hpp"

namespace gleam {

namespace {

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::uint8_t threshold_count(double z, double c0, double c1) {
  if (z <= c0) return 0;
  if (z > c1) return 2;
  return 1;
}

double sample_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double den = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  return den > 0.0 ? ca.dot(cb) / den : 0.0;
}

}  // namespace

AncestryMatrix sample_ancestry_hwe(std::span<const double> paap, std::size_t subjects, Rng& rng) {
  for (double p : paap)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(fmt::format("ancestry frequency {} outside [0, 1]", p));
  AncestryMatrix S(subjects, paap.size());
  for (std::size_t i = 0; i < subjects; ++i) {
    for (std::size_t j = 0; j < paap.size(); ++j) {
      const double p = paap[j];
      const double u = draw_uniform(rng);
      const double q0 = (1.0 - p) * (1.0 - p);
      S(i, j) = u < q0 ? 0.0 : (u < 1.0 - p * p ? 1.0 : 2.0);
    }
  }
  return S;
}

AncestryMatrix sample_correlated_ancestry(double p_a, double rho_latent, std::size_t subjects, Rng& rng) {
  if (!(p_a > 0.0 && p_a < 1.0)) throw DomainError("construction frequency must lie in (0, 1)");
  if (!(rho_latent >= 0.0 && rho_latent < 1.0)) throw DomainError("latent correlation must lie in [0, 1)");
  const double c0 = normal_quantile((1.0 - p_a) * (1.0 - p_a));
  const double c1 = normal_quantile(1.0 - p_a * p_a);
  const double s = std::sqrt(1.0 - rho_latent * rho_latent);
  AncestryMatrix S(subjects, 2);
  for (std::size_t i = 0; i < subjects; ++i) {
    const double z1 = draw_normal(rng);
    const double z2 = rho_latent * z1 + s * draw_normal(rng);
    S(i, 0) = threshold_count(z1, c0, c1);
    S(i, 1) = threshold_count(z2, c0, c1);
  }
  return S;
}

TraitData simulate_traits(const AncestryMatrix& S, std::span<const CausalEffect> effects, double alpha,
                          TraitKind kind, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(S.rows());
  for (const auto& e : effects)
    if (e.locus >= static_cast<std::size_t>(S.cols()))
      throw DomainError(fmt::format("causal locus {} outside the ancestry matrix", e.locus));

  TraitData t;
  t.kind = kind;
  t.covariates.resize(n, 1);
  t.covariate_names = {"E"};
  t.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) t.covariates(i, 0) = draw_normal(rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    double eta = alpha * t.covariates(i, 0);
    for (const auto& e : effects) eta += e.beta * S(i, static_cast<Eigen::Index>(e.locus));
    switch (kind) {
      case TraitKind::Continuous:
        t.y[i] = eta + draw_normal(rng);
        break;
      case TraitKind::Binary:
        t.y[i] = draw_uniform(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
        break;
      case TraitKind::Count:
        t.y[i] = static_cast<double>(std::poisson_distribution<int>(std::exp(eta))(rng));
        break;
    }
  }
  return t;
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::Reg1: return "REG1";
    case Region::Reg2: return "REG2";
    case Region::Reg3: return "REG3";
    case Region::Locus1: return "Locus1";
    case Region::Locus2: return "Locus2";
  }
  return "unknown";
}

std::size_t ArtificialChromosome::region_size(Region r) const {
  return static_cast<std::size_t>(std::count(regions.begin(), regions.end(), r));
}

std::vector<Region> label_regions(const AncestryMatrix& ancestry, std::size_t locus1, std::size_t locus2) {
  const auto J = static_cast<std::size_t>(ancestry.cols());
  if (locus1 >= J || locus2 >= J || locus1 == locus2) throw DomainError("causal loci must be distinct columns");
  const Eigen::VectorXd a1 = ancestry.col(static_cast<Eigen::Index>(locus1));
  const Eigen::VectorXd a2 = ancestry.col(static_cast<Eigen::Index>(locus2));
  std::vector<Region> out(J, Region::Reg3);
  for (std::size_t j = 0; j < J; ++j) {
    if (j == locus1) {
      out[j] = Region::Locus1;
      continue;
    }
    if (j == locus2) {
      out[j] = Region::Locus2;
      continue;
    }
    const Eigen::VectorXd col = ancestry.col(static_cast<Eigen::Index>(j));
    const double r1 = std::abs(sample_correlation(col, a1));
    const double r2 = std::abs(sample_correlation(col, a2));
    if (r1 > kRegionThreshold && r1 >= r2)
      out[j] = Region::Reg1;
    else if (r2 > kRegionThreshold)
      out[j] = Region::Reg2;
  }
  return out;
}

ArtificialChromosome build_artificial_chromosome(const BlockGenerator& g, std::size_t subjects, Rng& rng) {
  if (subjects < 2) throw DomainError("artificial chromosome needs at least two subjects");
  if (!(g.paap_low > 0.0 && g.paap_low <= g.paap_high && g.paap_high < 1.0) ||
      !(g.causal_paap > 0.0 && g.causal_paap < 1.0))
    throw DomainError("block generator frequencies must lie in (0, 1)");

  ArtificialChromosome ch;
  const std::size_t J = 2 * kSegmentLoci;
  ch.ancestry = AncestryMatrix::Zero(static_cast<Eigen::Index>(subjects), static_cast<Eigen::Index>(J));
  ch.position_mb.resize(J);
  ch.segment.resize(J);
  ch.paap.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    const std::size_t seg = j / kSegmentLoci;
    const std::size_t k = j % kSegmentLoci;
    ch.segment[j] = static_cast<std::uint8_t>(seg);
    ch.position_mb[j] = g.length_mb[seg] * static_cast<double>(k) / static_cast<double>(kSegmentLoci - 1);
    ch.paap[j] = k == kCausalOffset ? g.causal_paap
                                    : g.paap_low + (g.paap_high - g.paap_low) * draw_uniform(rng);
  }
  std::vector<double> cut(J), lag(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    cut[j] = normal_quantile(1.0 - ch.paap[j]);
    if (j % kSegmentLoci != 0) {
      const std::size_t seg = ch.segment[j];
      lag[j] = std::exp(-g.decay_per_mb[seg] * (ch.position_mb[j] - ch.position_mb[j - 1]));
    }
  }
  for (std::size_t i = 0; i < subjects; ++i) {
    for (int hap = 0; hap < 2; ++hap) {
      double z = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        const double e = draw_normal(rng);
        z = j % kSegmentLoci == 0 ? e : lag[j] * z + std::sqrt(1.0 - lag[j] * lag[j]) * e;
        if (z > cut[j]) ch.ancestry(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 1.0;
      }
    }
  }
  ch.regions = label_regions(ch.ancestry, ch.locus1, ch.locus2);
  return ch;
}

ArtificialChromosome build_artificial_chromosome(const AncestryDraws& source, std::size_t subjects) {
  const std::size_t J = 2 * kSegmentLoci;
  if (source.count() == 0 || source.loci < J || source.subjects < subjects || subjects < 2)
    throw DomainError(fmt::format("ancestry source too small: need at least {} loci and {} subjects, have {} and {}",
                                  J, subjects, source.loci, source.subjects));
  ArtificialChromosome ch;
  ch.ancestry.resize(static_cast<Eigen::Index>(subjects), static_cast<Eigen::Index>(J));
  ch.position_mb.resize(J);
  ch.segment.resize(J);
  ch.paap.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < subjects; ++i) {
      const double v = source(0, i, j);
      ch.ancestry(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      sum += v;
    }
    ch.segment[j] = static_cast<std::uint8_t>(j / kSegmentLoci);
    ch.position_mb[j] = static_cast<double>(j % kSegmentLoci);
    ch.paap[j] = sum / (2.0 * static_cast<double>(subjects));
  }
  ch.regions = label_regions(ch.ancestry, ch.locus1, ch.locus2);
  return ch;
}

// --- scenarios --------------------------------------------------------------

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Null: return "null";
    case ScenarioKind::SingleLocus: return "single_locus";
    case ScenarioKind::Multilocus: return "multilocus";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view text) {
  if (text == "null") return ScenarioKind::Null;
  if (text == "single_locus" || text == "single") return ScenarioKind::SingleLocus;
  if (text == "multilocus" || text == "multi") return ScenarioKind::Multilocus;
  throw ConfigError(fmt::format("unknown scenario kind '{}'", text));
}

void SimScenario::validate() const {
  if (subjects < 4) throw ConfigError("scenario needs at least 4 subjects");
  if (kind != ScenarioKind::Multilocus && loci < 1) throw ConfigError("scenario needs at least one locus");
  if (!paap.empty() && kind != ScenarioKind::Multilocus && paap.size() != loci)
    throw ConfigError(fmt::format("paap has {} entries for {} loci", paap.size(), loci));
  for (double p : paap)
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("paap entries must lie in (0, 1)");
  if (!(paap_low > 0.0 && paap_low <= paap_high && paap_high < 1.0))
    throw ConfigError("paap range must satisfy 0 < low <= high < 1");
  if (!(causal_paap_low > 0.0 && causal_paap_low <= causal_paap_high && causal_paap_high < 1.0))
    throw ConfigError("causal paap range must satisfy 0 < low <= high < 1");
  if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("effect multiplier c must be finite and >= 0");
  if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
}

std::string scenario_to_json(const SimScenario& s) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(s.kind);
  j["subjects"] = s.subjects;
  j["loci"] = s.loci;
  j["alpha"] = s.alpha;
  j["c"] = s.c;
  j["paap"] = s.paap;
  j["paap_range"] = {s.paap_low, s.paap_high};
  j["causal_paap_range"] = {s.causal_paap_low, s.causal_paap_high};
  j["trait"] = to_string(s.trait);
  j["replicates"] = s.replicates;
  j["seed"] = s.seed;
  return j.dump(2);
}

SimScenario scenario_from_json(std::string_view text) {
  SimScenario s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.kind = parse_scenario_kind(j.value("kind", std::string("null")));
    s.subjects = j.value("subjects", s.subjects);
    s.loci = j.value("loci", s.loci);
    s.alpha = j.value("alpha", s.alpha);
    s.c = j.value("c", s.c);
    s.paap = j.value("paap", s.paap);
    if (j.contains("paap_range")) {
      s.paap_low = j["paap_range"].at(0).get<double>();
      s.paap_high = j["paap_range"].at(1).get<double>();
    }
    if (j.contains("causal_paap_range")) {
      s.causal_paap_low = j["causal_paap_range"].at(0).get<double>();
      s.causal_paap_high = j["causal_paap_range"].at(1).get<double>();
    }
    s.trait = parse_trait_kind(j.value("trait", std::string("continuous")));
    s.replicates = j.value("replicates", s.replicates);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid scenario JSON: {}", e.what()));
  }
  s.validate();
  return s;
}

SimDataset generate_replicate(const SimScenario& s, std::size_t replicate, const BlockGenerator& generator) {
  s.validate();
  Rng rng = make_stream(s.seed, {replicate, 0x5157});
  SimDataset d;
  if (s.kind == ScenarioKind::Multilocus) {
    BlockGenerator g = generator;
    g.paap_low = s.paap_low;
    g.paap_high = s.paap_high;
    auto ch = build_artificial_chromosome(g, s.subjects, rng);
    d.ancestry = std::move(ch.ancestry);
    d.paap = std::move(ch.paap);
    d.regions = std::move(ch.regions);
    d.causal = {{ch.locus1, s.c * d.paap[ch.locus1]}, {ch.locus2, s.c * d.paap[ch.locus2]}};
  } else {
    if (s.paap.empty()) {
      d.paap.resize(s.loci);
      for (double& p : d.paap) p = s.paap_low + (s.paap_high - s.paap_low) * draw_uniform(rng);
    } else {
      d.paap = s.paap;
    }
    if (s.kind == ScenarioKind::SingleLocus) {
      const auto locus = static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, s.loci - 1)(rng));
      d.paap[locus] = s.causal_paap_low + (s.causal_paap_high - s.causal_paap_low) * draw_uniform(rng);
      d.causal = {{locus, s.c * d.paap[locus]}};
    }
    d.ancestry = sample_ancestry_hwe(d.paap, s.subjects, rng);
  }
  // Traits use their own stream so the ancestry does not depend on c.
  Rng trait_rng = make_stream(s.seed, {replicate, 0x7a17});
  d.trait = simulate_traits(d.ancestry, d.causal, s.alpha, s.trait, trait_rng);
  return d;
}

AncestryDraws as_draws(const AncestryMatrix& ancestry, std::uint64_t seed) {
  AncestryDraws d;
  d.subjects = static_cast<std::size_t>(ancestry.rows());
  d.loci = static_cast<std::size_t>(ancestry.cols());
  d.seed = seed;
  std::vector<std::uint8_t> flat(d.subjects * d.loci);
  for (std::size_t i = 0; i < d.subjects; ++i)
    for (std::size_t j = 0; j < d.loci; ++j)
      flat[i * d.loci + j] =
          static_cast<std::uint8_t>(ancestry(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  d.append(flat, 0);
  d.subject_ids.reserve(d.subjects);
  for (std::size_t i = 0; i < d.subjects; ++i) d.subject_ids.push_back(fmt::format("S{:05d}", i + 1));
  d.marker_ids.reserve(d.loci);
  for (std::size_t j = 0; j < d.loci; ++j) d.marker_ids.push_back(fmt::format("M{:05d}", j + 1));
  return d;
}

}  // namespace gleam
