// gleam: ancestry imputation and generalized admixture mapping.

#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gleam/error.hpp"
#include "gleam/parallel.hpp"
#include "gleam/pipeline.hpp"

namespace {

using gleam::RunConfig;

void error_record(const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

void add_common(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("-o,--out", c.output_dir, "Output directory")->required();
  cmd->add_option("-t,--threads", c.workers, "Worker threads (default: GLEAM_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
}

void add_ancestry_inputs(CLI::App* cmd, RunConfig& c, bool allow_draws) {
  cmd->add_option("--panel", c.panel, "AIM panel TSV: marker_id chrom position pA0 pB0");
  cmd->add_option("--genotypes", c.genotypes, "Genotype TSV: subject_id then one column per marker");
  if (allow_draws) cmd->add_option("--draws", c.draws, "Ancestry draws file written by `gleam impute`");
  cmd->add_option_function<std::string>(
         "--position-unit", [&c](const std::string& v) { c.panel_options.unit = gleam::parse_position_unit(v); },
         "Panel position unit: morgan, cM or Mb")
      ->check(CLI::IsMember({"morgan", "cM", "Mb"}));
  cmd->add_option("--cm-per-mb", c.panel_options.cm_per_mb, "Conversion for Mb positions");
  auto& h = c.hyper;
  cmd->add_option("--lambda", h.lambda, "Recombinations per Morgan");
  cmd->add_option("--mu0", h.mu0, "Prior variance of recombination probabilities");
  cmd->add_option("--rho0", h.default_rho0, "Prior mean admixture proportion");
  cmd->add_option("--nu0", h.nu0, "Prior variance of admixture proportions");
  cmd->add_option("--mh-sigma", h.mh_sigma, "Initial random-walk step for tauA/tauB");
  cmd->add_option("--burn-in", h.burn_in, "Burn-in sweeps");
  cmd->add_option("--sweeps", h.n_draws, "Sweeps after burn-in");
  cmd->add_option("--thin", h.thin, "Keep every thin-th sweep (draws = sweeps / thin)");
  cmd->add_option("--seed", h.seed, "Random seed");
}

void add_scan_options(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--phenotype", c.phenotype, "Phenotype TSV: subject_id trait covariates...");
  cmd->add_option_function<std::string>(
         "--trait", [&c](const std::string& v) { c.trait_kind = gleam::parse_trait_kind(v); },
         "continuous, binary or count")
      ->check(CLI::IsMember({"continuous", "binary", "count"}));
  cmd->add_option("--covariates", c.covariates, "Covariate column names (default: all remaining)")->delimiter(',');
  cmd->add_option("--delta", c.delta, "Selection threshold on log10 BF (accepts inf)");
  cmd->add_option("--max-cardinality", c.max_cardinality, "Largest stage-2 subset (0 = no bound)");
  cmd->add_option("--subset-cap", c.subset_cap, "Refuse stage 2 above this many subsets");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gleam: admixture HMM ancestry imputation and generalized admixture mapping"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GLEAM_VERSION);

  RunConfig c;
  c.workers = gleam::default_worker_count();

  auto* impute = app.add_subcommand("impute", "Sample local ancestry draws from genotypes");
  add_common(impute, c);
  add_ancestry_inputs(impute, c, false);

  auto* scan = app.add_subcommand("scan", "Stage-1 single-locus Bayes factor scan");
  add_common(scan, c);
  add_ancestry_inputs(scan, c, true);
  add_scan_options(scan, c);

  auto* map = app.add_subcommand("map", "Two-stage generalized admixture mapping");
  add_common(map, c);
  add_ancestry_inputs(map, c, true);
  add_scan_options(map, c);

  auto* ald = app.add_subcommand("ald", "Admixture-LD correlation matrix from draws");
  add_common(ald, c);
  add_ancestry_inputs(ald, c, true);

  std::string scenario_file;
  std::string scenario_kind = "null";
  auto* simulate = app.add_subcommand("simulate", "Simulate a scenario and score the replicates");
  add_common(simulate, c);
  simulate->add_option("--scenario", scenario_file, "Scenario JSON; replaces the scenario flags below");
  simulate->add_option("--kind", scenario_kind, "null, single_locus or multilocus")
      ->check(CLI::IsMember({"null", "single_locus", "multilocus"}));
  simulate->add_option("--subjects", c.scenario.subjects, "Subjects per replicate");
  simulate->add_option("--loci", c.scenario.loci, "Loci per replicate (null and single_locus)");
  simulate->add_option("--alpha", c.scenario.alpha, "Covariate effect");
  simulate->add_option("--c", c.scenario.c, "Effect multiplier; beta = c x PAAP");
  simulate->add_option("--replicates", c.scenario.replicates, "Replicate count");
  simulate->add_option("--seed", c.scenario.seed, "Random seed");
  simulate
      ->add_option_function<std::string>(
          "--trait", [&c](const std::string& v) { c.scenario.trait = gleam::parse_trait_kind(v); },
          "continuous, binary or count")
      ->check(CLI::IsMember({"continuous", "binary", "count"}));
  simulate->add_option("--delta", c.delta, "Selection threshold on log10 BF");
  simulate->add_option("--max-cardinality", c.max_cardinality, "Largest stage-2 subset (0 = no bound)");
  simulate->add_option("--subset-cap", c.subset_cap, "Refuse stage 2 above this many subsets");
  bool no_dataset = false;
  simulate->add_flag("--no-dataset", no_dataset, "Skip writing replicate 0 in the input formats");

  auto* density = app.add_subcommand("density", "Export QNM prior density grids");
  add_common(density, c);
  density->add_option("--paap", c.density_paap, "Construction frequencies for the univariate grids")->delimiter(',');
  density->add_option("--tau", c.density_tau, "tau values (the first also scales the bivariate grid)")->delimiter(',');
  density->add_option("--correlation", c.density_correlation, "Latent correlations for the bivariate grids")
      ->delimiter(',');
  density->add_option("--sigma2", c.density_sigma2, "sigma2");
  density->add_option("--beta-max", c.density_beta_max, "Grid half-width");
  density->add_option("--points", c.density_points, "Grid points per axis");
  density->add_option("--subjects", c.density_subjects, "Subjects in each ancestry construction");
  density->add_option("--pair-paap", c.density_pair_paap, "Construction frequency for the bivariate grids");
  density->add_option("--seed", c.hyper.seed, "Random seed");

  std::string manifest;
  auto* rerun = app.add_subcommand("rerun", "Re-run the command recorded in a manifest");
  rerun->add_option("manifest", manifest, "manifest.json from a previous run")->required();
  add_common(rerun, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    error_record("usage", e.what());
    return 2;
  }

  try {
    if (rerun->parsed()) {
      RunConfig loaded = gleam::load_manifest(manifest);
      loaded.output_dir = c.output_dir;
      loaded.workers = c.workers;
      c = std::move(loaded);
    } else {
      c.command = app.get_subcommands().front()->get_name();
      if (simulate->parsed()) {
        if (!scenario_file.empty()) {
          c.scenario = gleam::scenario_from_json(gleam::read_text_file(scenario_file));
        } else {
          c.scenario.kind = gleam::parse_scenario_kind(scenario_kind);
        }
        c.emit_dataset = !no_dataset;
      }
    }
    const auto summary = gleam::run_pipeline(c);
    for (const auto& p : summary.outputs) std::cout << p.string() << '\n';
    if (!summary.notes.empty())
      std::cerr << summary.notes.size() << " diagnostic message(s) written to diagnostics.tsv\n";
  } catch (const gleam::Error& e) {
    error_record(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_record("internal", e.what());
    return 1;
  }
  return 0;
}
