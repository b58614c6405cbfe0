#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gleam/mapping.hpp"
#include "gleam/simgen.hpp"

namespace gleam {

/// Scoring of simulated replicates against their known truth. The true
/// ancestries are used directly, as a single draw.

struct NullOutcome {
  std::size_t replicate = 0;
  std::size_t loci = 0;
  std::size_t selected = 0;
  std::size_t skipped = 0;
  double rate = 0.0;  // selected / scored loci
};

struct PowerOutcome {
  std::size_t replicate = 0;
  std::size_t causal = 0;
  double paap = 0.0;
  double beta = 0.0;
  double log10_bf = 0.0;
  bool detected = false;
};

struct MultilocusOutcome {
  std::size_t replicate = 0;
  std::size_t region_size[3] = {0, 0, 0};  // REG1, REG2, REG3
  double stage1_region[3] = {0, 0, 0};     // fraction of region loci identified
  double stage2_region[3] = {0, 0, 0};
  bool stage1_locus1_only = false;
  bool stage1_locus2_only = false;
  bool stage1_pair = false;  // both causal loci selected
  bool stage2_locus1_only = false;
  bool stage2_locus2_only = false;
  bool stage2_pair = false;      // both causal loci among identified loci
  bool stage2_pair_top = false;  // {Locus1, Locus2} is the top-ranked subset
  std::size_t selected = 0;
};

NullOutcome score_null_replicate(const SimScenario& scenario, std::size_t replicate, const ScanOptions& options);
PowerOutcome score_power_replicate(const SimScenario& scenario, std::size_t replicate, const ScanOptions& options);
MultilocusOutcome score_multilocus_replicate(const SimScenario& scenario, std::size_t replicate,
                                             const ScanOptions& options, const BlockGenerator& generator = {});

/// Runs every replicate of the scenario, `workers` replicates at a time, and
/// returns one tab-separated row per replicate plus a summary row set.
struct ExperimentTables {
  std::string replicates;  // TSV with header
  std::string summary;     // TSV with header
};

ExperimentTables run_experiment(const SimScenario& scenario, const ScanOptions& options, unsigned workers,
                                const BlockGenerator& generator = {});

}  // namespace gleam
