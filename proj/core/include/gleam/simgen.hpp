#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gleam/glm.hpp"
#include "gleam/hmm_sampler.hpp"
#include "gleam/rng.hpp"

namespace gleam {

/// I × J matrix of ancestry counts with entries 0, 1 or 2 (stored as double so
/// it feeds the GLM directly).
using AncestryMatrix = Eigen::MatrixXd;

/// Independent HWE ancestry counts, column j drawn with frequency paap[j].
AncestryMatrix sample_ancestry_hwe(std::span<const double> paap, std::size_t subjects, Rng& rng);

/// Ancestry pairs from a bivariate standard normal latent with correlation
/// rho_latent, thresholded at Φ^-1((1-p)^2) and Φ^-1(1-p^2).
AncestryMatrix sample_correlated_ancestry(double p_a, double rho_latent, std::size_t subjects, Rng& rng);

struct CausalEffect {
  std::size_t locus = 0;
  double beta = 0.0;
};

/// y = alpha E + Σ beta_k S_k + eps (continuous), logit P(y = 1) = alpha E + Σ beta_k S_k
/// (binary) or log E[y] = alpha E + Σ beta_k S_k (count). E and eps are standard
/// normal. E is always drawn and always returned as covariate "E".
///
/// Random numbers are consumed in a fixed order that does not depend on the
/// effects, so zero effects reproduce the null generator exactly.
TraitData simulate_traits(const AncestryMatrix& S, std::span<const CausalEffect> effects, double alpha,
                          TraitKind kind, Rng& rng);

// --- artificial chromosome --------------------------------------------------

enum class Region : std::uint8_t { Reg1, Reg2, Reg3, Locus1, Locus2 };

std::string_view to_string(Region region);

inline constexpr std::size_t kSegmentLoci = 51;
inline constexpr std::size_t kCausalOffset = 25;  // middle of a segment
inline constexpr double kRegionThreshold = 0.12;
inline constexpr double kCausalPaap = 0.88;

/// Latent-Gaussian block generator. Each haplotype carries an AR(1) standard
/// normal latent along the segment with lag-one correlation
/// exp(-decay_per_mb * spacing); the ancestry indicator is the latent
/// thresholded to frequency paap. The decay rates are calibrated so the
/// |r| > 0.12 neighbourhoods of the causal loci hold about 42 and 35 loci.
struct BlockGenerator {
  double length_mb[2] = {139.50, 114.88};
  double decay_per_mb[2] = {0.0233, 0.0335};
  double paap_low = 0.72;
  double paap_high = 0.86;
  double causal_paap = kCausalPaap;
};

struct ArtificialChromosome {
  AncestryMatrix ancestry;               // I × 102
  std::vector<double> position_mb;       // within its segment
  std::vector<std::uint8_t> segment;     // 0 or 1
  std::vector<double> paap;              // generating frequencies (sample means / 2 for user sources)
  std::size_t locus1 = kCausalOffset;
  std::size_t locus2 = kSegmentLoci + kCausalOffset;
  std::vector<Region> regions;

  std::size_t loci() const noexcept { return static_cast<std::size_t>(ancestry.cols()); }
  std::size_t region_size(Region r) const;
};

/// Labels loci by their sample correlation with the causal loci. A locus
/// correlated above the threshold with both is assigned to the stronger one.
std::vector<Region> label_regions(const AncestryMatrix& ancestry, std::size_t locus1, std::size_t locus2);

ArtificialChromosome build_artificial_chromosome(const BlockGenerator& generator, std::size_t subjects, Rng& rng);

/// Builds the chromosome from user-supplied ancestry: columns [0, 51) and
/// [51, 102) of the first draw become the two segments. Throws DomainError if
/// the source has fewer than 102 loci or fewer than `subjects` subjects.
ArtificialChromosome build_artificial_chromosome(const AncestryDraws& source, std::size_t subjects);

// --- scenarios --------------------------------------------------------------

enum class ScenarioKind { Null, SingleLocus, Multilocus };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view text);

struct SimScenario {
  ScenarioKind kind = ScenarioKind::Null;
  std::size_t subjects = 1000;
  std::size_t loci = 1000;  // ignored for multilocus (always 102)
  double alpha = 0.0;
  double c = 0.0;
  std::vector<double> paap;  // empty: drawn per replicate from [paap_low, paap_high]
  double paap_low = 0.72;
  double paap_high = 0.86;
  double causal_paap_low = 0.8321;
  double causal_paap_high = 0.8817;
  TraitKind trait = TraitKind::Continuous;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;

  /// Throws ConfigError.
  void validate() const;
  friend bool operator==(const SimScenario&, const SimScenario&) = default;
};

std::string scenario_to_json(const SimScenario& scenario);
SimScenario scenario_from_json(std::string_view text);

/// One generated replicate. `causal` lists the loci with nonzero effect
/// multipliers; `regions` is filled for multilocus scenarios only.
struct SimDataset {
  AncestryMatrix ancestry;
  std::vector<double> paap;
  std::vector<CausalEffect> causal;
  TraitData trait;
  std::vector<Region> regions;
};

/// Replicate r of the scenario, from its own seed stream.
SimDataset generate_replicate(const SimScenario& scenario, std::size_t replicate,
                              const BlockGenerator& generator = {});

/// Wraps an ancestry matrix as a single-draw AncestryDraws with generated ids.
AncestryDraws as_draws(const AncestryMatrix& ancestry, std::uint64_t seed = 0);

}  // namespace gleam
