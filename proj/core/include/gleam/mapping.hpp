#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gleam/glm.hpp"
#include "gleam/hmm_sampler.hpp"
#include "gleam/qnm.hpp"

namespace gleam {

struct ScanOptions {
  double delta = 2.0;                // selection threshold on log10 BF
  std::size_t max_cardinality = 0;  // stage-2 subset size bound, 0 = no bound
  std::size_t subset_cap = 4096;
  unsigned workers = 1;
  std::vector<double> weights;  // per-draw averaging weights, empty = equal
};

struct LocusScore {
  std::size_t locus = 0;
  double log10_bf = std::numeric_limits<double>::quiet_NaN();
  double T = 0.0;        // weighted mean over used draws
  double tau_hat = 0.0;  // weighted mean over used draws
  bool selected = false;
  bool skipped = false;  // no draw produced a usable fit
  std::size_t draws_used = 0;
};

struct SubsetScore {
  std::vector<std::size_t> loci;
  double log10_bf = std::numeric_limits<double>::quiet_NaN();
  bool skipped = false;
  std::size_t draws_used = 0;
};

struct ScanResult {
  std::vector<LocusScore> loci;      // in locus order
  std::vector<SubsetScore> subsets;  // ranked, best first; skipped subsets last
  double delta = 2.0;
  std::size_t draws = 0;
  bool stage2_done = false;
  std::vector<std::string> diagnostics;

  std::vector<std::size_t> selected() const;
  std::size_t skipped_count() const;
};

/// Column `locus` of draw m as a double vector.
Eigen::VectorXd ancestry_column(const AncestryDraws& draws, std::size_t m, std::size_t locus);

/// Averaged Bayes factor of one locus set over all draws.
BfValue score_subset(const AncestryDraws& draws, const TraitData& trait, const std::vector<std::size_t>& loci,
                     std::span<const double> weights, std::vector<std::string>* notes = nullptr);

/// Stage 1: per-locus fit and Bayes factor for every draw, averaged over
/// draws; loci with log10 BF > delta are selected.
ScanResult stage1_scan(const AncestryDraws& draws, const TraitData& trait, const ScanOptions& options);

/// Stage 2: joint fits over every nonempty subset of the selected loci up to
/// max_cardinality, ranked by averaged log10 BF (ties broken by the locus
/// list). A single selected locus is passed through with its stage-1 score.
/// Throws ConfigError when the subset count exceeds options.subset_cap.
void stage2_joint(ScanResult& result, const AncestryDraws& draws, const TraitData& trait, const ScanOptions& options);

/// Number of nonempty subsets of n loci with at most k members (k = 0: all),
/// saturating at SIZE_MAX.
std::size_t subset_count(std::size_t n, std::size_t k);

/// Stage-2 reporting rule: indices into result.subsets of subsets whose
/// log10 BF exceeds delta and which rank above every overlapping subset.
std::vector<std::size_t> identified_subsets(const ScanResult& result);

/// Loci identified by the stage-2 rule (union of identified subsets, sorted).
std::vector<std::size_t> identified_loci(const ScanResult& result);

struct AldResult {
  Eigen::MatrixXd correlation;         // J × J, unit diagonal
  std::vector<std::uint8_t> constant;  // loci with zero pooled variance
};

/// Pearson correlation of ancestry counts between loci, pooling subjects over
/// all draws. Constant loci get correlation 0 with every other locus.
AldResult ald_correlation(const AncestryDraws& draws);

}  // namespace gleam
