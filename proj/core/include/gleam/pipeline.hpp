#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "gleam/glm.hpp"
#include "gleam/hmm_sampler.hpp"
#include "gleam/io.hpp"
#include "gleam/simgen.hpp"

namespace gleam {

/// Everything a subcommand needs. The output directory and worker count are
/// deliberately left out of the manifest: neither changes any result.
struct RunConfig {
  std::string command;  // impute, scan, map, simulate, ald, density
  fs::path panel;
  fs::path genotypes;
  fs::path phenotype;
  fs::path draws;
  fs::path output_dir;
  PanelReadOptions panel_options;
  HmmHyperparams hyper;
  TraitKind trait_kind = TraitKind::Continuous;
  std::vector<std::string> covariates;  // empty: all phenotype columns after the trait
  double delta = 2.0;
  std::size_t max_cardinality = 0;
  std::size_t subset_cap = 4096;
  unsigned workers = 1;

  // simulate
  SimScenario scenario;
  bool emit_dataset = true;  // write replicate 0 in the input formats

  // density
  std::vector<double> density_paap = {0.8, 0.9, 0.99};
  std::vector<double> density_tau = {0.01};
  std::vector<double> density_correlation = {0.0, 0.25, 0.75};
  double density_sigma2 = 1.0;
  double density_beta_max = 1.0;
  std::size_t density_points = 101;
  std::size_t density_subjects = 1000;
  double density_pair_paap = 0.8;

  /// Checks files and numeric bounds. Throws ConfigError.
  void validate() const;
};

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);

struct RunSummary {
  std::vector<fs::path> outputs;
  std::vector<std::string> notes;
};

/// Runs config.command and writes its outputs plus manifest.json into
/// config.output_dir.
RunSummary run_pipeline(const RunConfig& config);

/// Reads a manifest written by run_pipeline; output_dir and workers are left
/// for the caller to set.
RunConfig load_manifest(const fs::path& path);

}  // namespace gleam
