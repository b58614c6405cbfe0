#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sys/wait.h>
#include <random>
#include <sstream>

#include "gleam/error.hpp"
#include "gleam/io.hpp"
#include "gleam/pipeline.hpp"

using namespace gleam;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("gleam_pipe_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

std::string cli() {
  const char* p = std::getenv("GLEAM_CLI");
  return p ? p : "";
}

int run(const std::string& args, const fs::path& err = "/dev/null") {
  const std::string cmd = cli() + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Every regular file of the directory by name, except the manifest when asked.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files[e.path().filename().string()] = read_text_file(e.path());
  return files;
}

std::vector<std::vector<std::string>> read_tsv(const fs::path& p) {
  std::istringstream in(read_text_file(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, '\t')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

RunConfig simulate_config(const fs::path& out) {
  RunConfig c;
  c.command = "simulate";
  c.output_dir = out;
  c.scenario.kind = ScenarioKind::SingleLocus;
  c.scenario.subjects = 300;
  c.scenario.loci = 12;
  c.scenario.c = 1.2;
  c.scenario.replicates = 3;
  c.scenario.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("configuration validation") {
  TempDir dir;
  RunConfig c;
  c.command = "scan";
  c.output_dir = dir / "out";
  c.phenotype = dir / "nope.tsv";
  c.draws = dir / "nope.bin";
  CHECK_THROWS_AS(run_pipeline(c), ConfigError);
  c.command = "dance";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = simulate_config(dir / "out");
  c.workers = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = simulate_config(dir / "out");
  c.density_points = 1;
  c.command = "density";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config JSON round trip") {
  RunConfig c = simulate_config("/tmp/x");
  c.delta = INFINITY;
  c.covariates = {"E", "age"};
  c.hyper.rho0 = {0.7, 0.8};
  const auto back = config_from_json(config_to_json(c));
  CHECK(std::isinf(back.delta));
  CHECK(back.covariates == c.covariates);
  CHECK(back.hyper.rho0 == c.hyper.rho0);
  CHECK(back.scenario == c.scenario);
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
}

TEST_CASE("simulate then map finds the causal locus") {
  TempDir dir;
  const auto sim = dir / "sim";
  run_pipeline(simulate_config(sim));
  for (const char* f : {"replicates.tsv", "summary.tsv", "scenario.json", "truth_draws.bin", "phenotype.tsv",
                        "truth.tsv", "panel.tsv", "genotypes.tsv", "manifest.json", "diagnostics.tsv"})
    CHECK(fs::exists(sim / f));

  std::string causal;
  for (const auto& row : read_tsv(sim / "truth.tsv"))
    if (row.size() == 4 && row[3] == "causal") causal = row[0];
  REQUIRE_FALSE(causal.empty());

  RunConfig m;
  m.command = "map";
  m.output_dir = dir / "map";
  m.draws = sim / "truth_draws.bin";
  m.phenotype = sim / "phenotype.tsv";
  run_pipeline(m);
  const auto scan = read_tsv(dir / "map" / "scan.tsv");
  REQUIRE(scan.size() == 13);
  std::string best;
  double top = -INFINITY;
  for (std::size_t r = 1; r < scan.size(); ++r) {
    const double v = scan[r][2] == "NA" ? -INFINITY : std::stod(scan[r][2]);
    if (v > top) {
      top = v;
      best = scan[r][0];
    }
  }
  CHECK(best == causal);
  CHECK(fs::exists(dir / "map" / "subsets.tsv"));

  SUBCASE("infinite threshold selects nothing") {
    RunConfig s = m;
    s.command = "scan";
    s.output_dir = dir / "scan_inf";
    s.delta = INFINITY;
    run_pipeline(s);
    const auto t = read_tsv(dir / "scan_inf" / "scan.tsv");
    REQUIRE(t.size() == 13);
    for (std::size_t r = 1; r < t.size(); ++r) CHECK(t[r][5] == "0");
    CHECK_FALSE(fs::exists(dir / "scan_inf" / "subsets.tsv"));
  }
}

TEST_CASE("impute, ald and density commands") {
  TempDir dir;
  auto sc = simulate_config(dir / "sim");
  sc.scenario.kind = ScenarioKind::Multilocus;
  sc.scenario.subjects = 30;
  sc.scenario.c = 0.7;
  sc.scenario.replicates = 1;
  sc.max_cardinality = 2;
  run_pipeline(sc);

  RunConfig imp;
  imp.command = "impute";
  imp.output_dir = dir / "imp";
  imp.panel = dir / "sim" / "panel.tsv";
  imp.genotypes = dir / "sim" / "genotypes.tsv";
  imp.hyper.burn_in = 20;
  imp.hyper.n_draws = 20;
  imp.hyper.thin = 10;
  run_pipeline(imp);
  const auto draws = read_draws(dir / "imp" / "draws.bin");
  CHECK(draws.count() == 2);
  CHECK(draws.loci == 102);
  CHECK(draws.subjects == 30);
  CHECK(read_tsv(dir / "imp" / "ancestry_mean.tsv").size() == 31);

  RunConfig a;
  a.command = "ald";
  a.output_dir = dir / "ald";
  a.draws = dir / "imp" / "draws.bin";
  run_pipeline(a);
  const auto t = read_tsv(dir / "ald" / "ald.tsv");
  CHECK(t.size() == 103);

  RunConfig d;
  d.command = "density";
  d.output_dir = dir / "dens";
  d.density_points = 11;
  d.density_subjects = 200;
  run_pipeline(d);
  CHECK(read_tsv(dir / "dens" / "density_univariate.tsv").size() == 1 + 3 * 11);
  CHECK(read_tsv(dir / "dens" / "density_bivariate.tsv").size() == 1 + 3 * 11 * 11);
}

TEST_CASE("manifest re-run reproduces the outputs") {
  TempDir dir;
  run_pipeline(simulate_config(dir / "a"));
  RunConfig again = load_manifest(dir / "a" / "manifest.json");
  again.output_dir = dir / "b";
  again.workers = 2;
  run_pipeline(again);
  CHECK(snapshot(dir / "a") == snapshot(dir / "b"));
}

TEST_CASE("command line") {
  if (cli().empty()) {
    MESSAGE("GLEAM_CLI not set; skipping command-line checks");
    return;
  }
  TempDir dir;
  const std::string sim = "simulate --kind single_locus --subjects 120 --loci 8 --c 1 --replicates 2 --seed 5";
  REQUIRE(run(sim + " -o " + (dir / "one").string() + " -t 1") == 0);
  REQUIRE(run(sim + " -o " + (dir / "two").string() + " -t 3") == 0);
  CHECK(snapshot(dir / "one") == snapshot(dir / "two"));

  CHECK(run("scan -o " + (dir / "bad").string() + " --draws " + (dir / "missing.bin").string() + " --phenotype x",
            dir / "err.txt") == 1);
  const auto err = read_text_file(dir / "err.txt");
  CHECK(err.find("\"error\":\"config\"") != std::string::npos);

  CHECK(run("simulate --kind bogus -o " + (dir / "u").string(), dir / "usage.txt") == 2);
  CHECK(read_text_file(dir / "usage.txt").find("\"error\":\"usage\"") != std::string::npos);

  CHECK(run("rerun " + (dir / "one" / "manifest.json").string() + " -o " + (dir / "three").string()) == 0);
  CHECK(snapshot(dir / "one") == snapshot(dir / "three"));
}
