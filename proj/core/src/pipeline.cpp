#include "gleam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "gleam/error.hpp"
#include "gleam/experiments.hpp"
#include "gleam/hmm_model.hpp"
#include "gleam/mapping.hpp"
#include "gleam/qnm.hpp"
#include "json.hpp"

#ifndef GLEAM_VERSION
#define GLEAM_VERSION "0.0.0"
#endif

namespace gleam {

using ojson = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kCommands = {"impute", "scan", "map", "simulate", "ald", "density"};

bool needs_ancestry(const std::string& c) { return c == "scan" || c == "map" || c == "ald" || c == "impute"; }

void require_file(const fs::path& p, std::string_view what) {
  if (p.empty()) throw ConfigError(fmt::format("{} path is required", what));
  if (!fs::is_regular_file(p)) throw ConfigError(fmt::format("{} file '{}' does not exist", what, p.string()));
}

}  // namespace

void RunConfig::validate() const {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw ConfigError(fmt::format("unknown command '{}'", command));
  if (output_dir.empty()) throw ConfigError("output directory is required");
  if (needs_ancestry(command)) {
    if (command == "impute" || draws.empty()) {
      require_file(panel, "panel");
      require_file(genotypes, "genotype");
      if (hyper.burn_in < 1 || hyper.n_draws < 1 || hyper.thin < 1 || hyper.thin > hyper.n_draws)
        throw ConfigError("burn-in and draws must be >= 1 and thin must lie in [1, draws]");
    } else {
      require_file(draws, "draws");
    }
  }
  if (command == "scan" || command == "map") require_file(phenotype, "phenotype");
  if (std::isnan(delta)) throw ConfigError("delta must be a number");
  if (subset_cap < 1) throw ConfigError("subset cap must be >= 1");
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  if (!(panel_options.cm_per_mb > 0.0)) throw ConfigError("cM per Mb must be positive");
  if (command == "simulate") scenario.validate();
  if (command == "density") {
    if (density_points < 2) throw ConfigError("density grid needs at least 2 points");
    if (density_subjects < 2) throw ConfigError("density construction needs at least 2 subjects");
    if (!(density_sigma2 > 0.0) || !(density_beta_max > 0.0)) throw ConfigError("sigma2 and beta max must be > 0");
    for (double t : density_tau)
      if (!(t > 0.0)) throw ConfigError("density tau values must be > 0");
    for (double p : density_paap)
      if (!(p > 0.0 && p < 1.0)) throw ConfigError("density frequencies must lie in (0, 1)");
    for (double r : density_correlation)
      if (!(r >= 0.0 && r < 1.0)) throw ConfigError("latent correlations must lie in [0, 1)");
    if (!(density_pair_paap > 0.0 && density_pair_paap < 1.0))
      throw ConfigError("pair construction frequency must lie in (0, 1)");
  }
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir))
    throw ConfigError(fmt::format("cannot create output directory '{}'", output_dir.string()));
  const fs::path probe = output_dir / ".gleam-write-test";
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError(fmt::format("output directory '{}' is not writable", output_dir.string()));
  }
  fs::remove(probe, ec);
}

// --- manifest -------------------------------------------------------------------

std::string config_to_json(const RunConfig& c) {
  ojson j;
  j["command"] = c.command;
  j["panel"] = c.panel.string();
  j["genotypes"] = c.genotypes.string();
  j["phenotype"] = c.phenotype.string();
  j["draws"] = c.draws.string();
  j["position_unit"] = to_string(c.panel_options.unit);
  j["cm_per_mb"] = c.panel_options.cm_per_mb;
  j["hmm"] = {{"lambda", c.hyper.lambda},       {"mu0", c.hyper.mu0},
              {"rho0", c.hyper.rho0},           {"default_rho0", c.hyper.default_rho0},
              {"nu0", c.hyper.nu0},             {"mh_sigma", c.hyper.mh_sigma},
              {"adapt_mh", c.hyper.adapt_mh},   {"tau_init", c.hyper.tau_init},
              {"burn_in", c.hyper.burn_in},     {"n_draws", c.hyper.n_draws},
              {"thin", c.hyper.thin},           {"seed", c.hyper.seed}};
  j["trait_kind"] = to_string(c.trait_kind);
  j["covariates"] = c.covariates;
  j["delta"] = std::isinf(c.delta) ? ojson(c.delta > 0 ? "inf" : "-inf") : ojson(c.delta);
  j["max_cardinality"] = c.max_cardinality;
  j["subset_cap"] = c.subset_cap;
  j["scenario"] = ojson::parse(scenario_to_json(c.scenario));
  j["emit_dataset"] = c.emit_dataset;
  j["density"] = {{"paap", c.density_paap},
                  {"tau", c.density_tau},
                  {"correlation", c.density_correlation},
                  {"sigma2", c.density_sigma2},
                  {"beta_max", c.density_beta_max},
                  {"points", c.density_points},
                  {"subjects", c.density_subjects},
                  {"pair_paap", c.density_pair_paap}};
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  RunConfig c;
  try {
    const auto j = ojson::parse(text);
    c.command = j.at("command").get<std::string>();
    c.panel = j.value("panel", std::string());
    c.genotypes = j.value("genotypes", std::string());
    c.phenotype = j.value("phenotype", std::string());
    c.draws = j.value("draws", std::string());
    c.panel_options.unit = parse_position_unit(j.value("position_unit", std::string("morgan")));
    c.panel_options.cm_per_mb = j.value("cm_per_mb", 1.0);
    if (j.contains("hmm")) {
      const auto& h = j["hmm"];
      c.hyper.lambda = h.value("lambda", c.hyper.lambda);
      c.hyper.mu0 = h.value("mu0", c.hyper.mu0);
      c.hyper.rho0 = h.value("rho0", c.hyper.rho0);
      c.hyper.default_rho0 = h.value("default_rho0", c.hyper.default_rho0);
      c.hyper.nu0 = h.value("nu0", c.hyper.nu0);
      c.hyper.mh_sigma = h.value("mh_sigma", c.hyper.mh_sigma);
      c.hyper.adapt_mh = h.value("adapt_mh", c.hyper.adapt_mh);
      c.hyper.tau_init = h.value("tau_init", c.hyper.tau_init);
      c.hyper.burn_in = h.value("burn_in", c.hyper.burn_in);
      c.hyper.n_draws = h.value("n_draws", c.hyper.n_draws);
      c.hyper.thin = h.value("thin", c.hyper.thin);
      c.hyper.seed = h.value("seed", c.hyper.seed);
    }
    c.trait_kind = parse_trait_kind(j.value("trait_kind", std::string("continuous")));
    c.covariates = j.value("covariates", c.covariates);
    if (j.contains("delta")) {
      const auto& d = j["delta"];
      if (d.is_string())
        c.delta = d.get<std::string>() == "-inf" ? -INFINITY : INFINITY;
      else
        c.delta = d.get<double>();
    }
    c.max_cardinality = j.value("max_cardinality", c.max_cardinality);
    c.subset_cap = j.value("subset_cap", c.subset_cap);
    if (j.contains("scenario")) c.scenario = scenario_from_json(j["scenario"].dump());
    c.emit_dataset = j.value("emit_dataset", c.emit_dataset);
    if (j.contains("density")) {
      const auto& d = j["density"];
      c.density_paap = d.value("paap", c.density_paap);
      c.density_tau = d.value("tau", c.density_tau);
      c.density_correlation = d.value("correlation", c.density_correlation);
      c.density_sigma2 = d.value("sigma2", c.density_sigma2);
      c.density_beta_max = d.value("beta_max", c.density_beta_max);
      c.density_points = d.value("points", c.density_points);
      c.density_subjects = d.value("subjects", c.density_subjects);
      c.density_pair_paap = d.value("pair_paap", c.density_pair_paap);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid manifest: {}", e.what()));
  }
  return c;
}

RunConfig load_manifest(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    const auto j = ojson::parse(text);
    return config_from_json(j.at("config").dump());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid manifest '{}': {}", path.string(), e.what()));
  }
}

// --- commands -------------------------------------------------------------------

namespace {

class Run {
 public:
  explicit Run(const RunConfig& c) : c_(c) {}

  RunSummary execute() {
    const auto& cmd = c_.command;
    if (cmd == "impute") impute();
    else if (cmd == "scan") scan(false);
    else if (cmd == "map") scan(true);
    else if (cmd == "simulate") simulate();
    else if (cmd == "ald") ald();
    else if (cmd == "density") density();
    write_diagnostics();
    write_manifest();
    return summary_;
  }

 private:
  fs::path out(std::string_view name) {
    const fs::path p = c_.output_dir / name;
    summary_.outputs.push_back(p);
    return p;
  }

  AncestryDraws obtain_draws() {
    if (!c_.draws.empty() && c_.command != "impute") {
      inputs_.emplace_back("draws", c_.draws);
      return read_draws(c_.draws);
    }
    inputs_.emplace_back("panel", c_.panel);
    inputs_.emplace_back("genotypes", c_.genotypes);
    const AimPanel panel = read_panel(c_.panel, c_.panel_options);
    const GenotypeMatrix g = read_genotypes(c_.genotypes, panel);
    g.validate(panel);
    HmmHyperparams h = c_.hyper;
    h.workers = c_.workers;
    h.validate(panel, g.subjects());
    if (g.missing_count() > 0)
      summary_.notes.push_back(fmt::format("{} missing genotype cells imputed each sweep", g.missing_count()));
    auto draws = run_mcmc(g, panel, h, true);
    write_draws(out("draws.bin"), draws);
    return draws;
  }

  void impute() {
    const auto draws = obtain_draws();
    // Posterior mean ancestry per subject and locus, for quick inspection.
    std::string table = "subject_id";
    for (const auto& id : draws.marker_ids) table += "\t" + id;
    table += '\n';
    for (std::size_t i = 0; i < draws.subjects; ++i) {
      table += draws.subject_ids[i];
      for (std::size_t j = 0; j < draws.loci; ++j) {
        double s = 0.0;
        for (std::size_t m = 0; m < draws.count(); ++m) s += draws(m, i, j);
        table += "\t" + format_real(s / static_cast<double>(draws.count()));
      }
      table += '\n';
    }
    write_text_file(out("ancestry_mean.tsv"), table);
  }

  void scan(bool two_stage) {
    auto draws = obtain_draws();
    inputs_.emplace_back("phenotype", c_.phenotype);
    const Phenotypes ph = read_phenotypes(c_.phenotype, c_.trait_kind, c_.covariates);
    if (!ph.dropped.empty())
      summary_.notes.push_back(fmt::format("{} phenotype rows dropped for missing values", ph.dropped.size()));
    const auto rows = align_subjects(draws.subject_ids, ph.subject_ids);
    if (rows.size() < draws.subjects)
      summary_.notes.push_back(
          fmt::format("{} ancestry subjects have no phenotype and were left out", draws.subjects - rows.size()));
    const auto aligned = draws.select_subjects(rows);

    ScanOptions o;
    o.delta = c_.delta;
    o.max_cardinality = c_.max_cardinality;
    o.subset_cap = c_.subset_cap;
    o.workers = c_.workers;
    auto result = stage1_scan(aligned, ph.trait, o);
    if (two_stage) stage2_joint(result, aligned, ph.trait, o);
    for (auto& d : result.diagnostics) summary_.notes.push_back(std::move(d));
    write_scan_table(out("scan.tsv"), result, aligned.marker_ids);
    if (two_stage) write_subset_table(out("subsets.tsv"), result, aligned.marker_ids);
  }

  void ald() {
    const auto draws = obtain_draws();
    const auto r = ald_correlation(draws);
    for (std::size_t j = 0; j < r.constant.size(); ++j)
      if (r.constant[j]) summary_.notes.push_back(fmt::format("{}: constant ancestry, correlations set to 0", draws.marker_ids[j]));
    write_ald_table(out("ald.tsv"), r, draws.marker_ids);
  }

  void density() {
    Rng rng = make_stream(c_.hyper.seed, {0xde45});
    const auto uni = univariate_density_grid(c_.density_paap, c_.density_tau, c_.density_sigma2, c_.density_subjects,
                                             c_.density_beta_max, c_.density_points, rng);
    write_density_table(out("density_univariate.tsv"), uni, false);
    const auto bi =
        bivariate_density_grid(c_.density_pair_paap, c_.density_correlation, c_.density_tau.front() * c_.density_sigma2,
                               c_.density_subjects, c_.density_beta_max, c_.density_points, rng);
    write_density_table(out("density_bivariate.tsv"), bi, true);
  }

  void simulate() {
    const SimScenario& s = c_.scenario;
    ScanOptions o;
    o.delta = c_.delta;
    o.max_cardinality = c_.max_cardinality;
    o.subset_cap = c_.subset_cap;
    const auto tables = run_experiment(s, o, c_.workers);
    write_text_file(out("replicates.tsv"), tables.replicates);
    write_text_file(out("summary.tsv"), tables.summary);
    write_text_file(out("scenario.json"), scenario_to_json(s) + "\n");
    if (c_.emit_dataset) emit_dataset(generate_replicate(s, 0));
  }

  /// Writes replicate 0 in the input formats: true ancestry as draws, the
  /// phenotype table, the truth table and genotypes drawn through the
  /// observation model from a synthetic AIM panel.
  void emit_dataset(const SimDataset& d) {
    const auto draws = as_draws(d.ancestry, c_.scenario.seed);
    write_draws(out("truth_draws.bin"), draws);
    write_phenotypes(out("phenotype.tsv"), draws.subject_ids, d.trait);

    std::string truth = "marker_id\tpaap\tbeta\tregion\n";
    for (std::size_t j = 0; j < draws.loci; ++j) {
      double beta = 0.0;
      for (const auto& e : d.causal)
        if (e.locus == j) beta = e.beta;
      const std::string region = d.regions.empty() ? std::string(beta != 0.0 ? "causal" : "null")
                                                   : std::string(to_string(d.regions[j]));
      truth += fmt::format("{}\t{}\t{}\t{}\n", draws.marker_ids[j], format_real(d.paap[j]), format_real(beta), region);
    }
    write_text_file(out("truth.tsv"), truth);

    Rng rng = make_stream(c_.scenario.seed, {0x9e0});
    const bool multilocus = !d.regions.empty();
    std::vector<Marker> markers(draws.loci);
    for (std::size_t j = 0; j < draws.loci; ++j) {
      auto& m = markers[j];
      m.id = draws.marker_ids[j];
      if (multilocus) {
        const std::size_t seg = j / kSegmentLoci;
        const double length = BlockGenerator{}.length_mb[seg];
        m.chromosome = static_cast<int>(seg + 1);
        // 1 cM per Mb.
        m.position = 0.01 * length * static_cast<double>(j % kSegmentLoci) / static_cast<double>(kSegmentLoci - 1);
      } else {
        m.chromosome = static_cast<int>(j + 1);
        m.position = 0.0;
      }
      m.pA0 = 0.6 + 0.35 * draw_uniform(rng);
      m.pB0 = 0.05 + 0.35 * draw_uniform(rng);
    }
    const AimPanel panel(std::move(markers));
    GenotypeMatrix g(draws.subjects, draws.loci);
    g.subject_ids = draws.subject_ids;
    for (std::size_t i = 0; i < draws.subjects; ++i) {
      for (std::size_t j = 0; j < draws.loci; ++j) {
        const auto P = observation_matrix(panel.marker(j).pA0, panel.marker(j).pB0);
        const auto& row = P[draws(0, i, j)];
        g(i, j) = static_cast<std::uint8_t>(draw_categorical(row, rng));
      }
    }
    write_panel(out("panel.tsv"), panel);
    write_genotypes(out("genotypes.tsv"), g, panel);
  }

  void write_diagnostics() {
    std::string text = "message\n";
    for (const auto& n : summary_.notes) text += n + "\n";
    write_text_file(out("diagnostics.tsv"), text);
  }

  void write_manifest() {
    ojson j;
    j["tool"] = "gleam";
    j["version"] = GLEAM_VERSION;
    j["command"] = c_.command;
    j["seed"] = c_.command == "simulate" ? c_.scenario.seed : c_.hyper.seed;
    j["config"] = ojson::parse(config_to_json(c_));
    ojson inputs = ojson::object();
    for (const auto& [name, path] : inputs_) {
      const std::string raw = read_text_file(path);
      inputs[name] = {{"path", path.string()},
                      {"crc32", fmt::format("{:08x}", crc32_of({reinterpret_cast<const std::uint8_t*>(raw.data()),
                                                                raw.size()}))}};
    }
    j["inputs"] = inputs;
    std::vector<std::string> names;
    for (const auto& p : summary_.outputs) names.push_back(p.filename().string());
    j["outputs"] = names;
    write_text_file(c_.output_dir / "manifest.json", j.dump(2) + "\n");
  }

  const RunConfig& c_;
  RunSummary summary_;
  std::vector<std::pair<std::string, fs::path>> inputs_;
};

}  // namespace

RunSummary run_pipeline(const RunConfig& config) {
  config.validate();
  return Run(config).execute();
}

}  // namespace gleam
