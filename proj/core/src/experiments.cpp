#include "gleam/experiments.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "gleam/io.hpp"
#include "gleam/parallel.hpp"

namespace gleam {

namespace {

ScanOptions single_threaded(ScanOptions o) {
  o.workers = 1;
  o.weights.clear();
  return o;
}

bool contains(const std::vector<std::size_t>& v, std::size_t x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

NullOutcome score_null_replicate(const SimScenario& scenario, std::size_t replicate, const ScanOptions& options) {
  const auto data = generate_replicate(scenario, replicate);
  const auto draws = as_draws(data.ancestry, scenario.seed);
  const auto scan = stage1_scan(draws, data.trait, single_threaded(options));
  NullOutcome o;
  o.replicate = replicate;
  o.loci = draws.loci;
  o.selected = scan.selected().size();
  o.skipped = scan.skipped_count();
  const std::size_t scored = o.loci - o.skipped;
  o.rate = scored > 0 ? static_cast<double>(o.selected) / static_cast<double>(scored) : 0.0;
  return o;
}

PowerOutcome score_power_replicate(const SimScenario& scenario, std::size_t replicate, const ScanOptions& options) {
  const auto data = generate_replicate(scenario, replicate);
  const auto draws = as_draws(data.ancestry, scenario.seed);
  const auto scan = stage1_scan(draws, data.trait, single_threaded(options));
  PowerOutcome o;
  o.replicate = replicate;
  if (data.causal.empty()) return o;
  o.causal = data.causal.front().locus;
  o.paap = data.paap[o.causal];
  o.beta = data.causal.front().beta;
  o.log10_bf = scan.loci[o.causal].log10_bf;
  o.detected = scan.loci[o.causal].selected;
  return o;
}

MultilocusOutcome score_multilocus_replicate(const SimScenario& scenario, std::size_t replicate,
                                             const ScanOptions& options, const BlockGenerator& generator) {
  const auto data = generate_replicate(scenario, replicate, generator);
  const auto draws = as_draws(data.ancestry, scenario.seed);
  const auto opts = single_threaded(options);
  auto scan = stage1_scan(draws, data.trait, opts);
  stage2_joint(scan, draws, data.trait, opts);

  const std::size_t l1 = data.causal[0].locus, l2 = data.causal[1].locus;
  const auto s1 = scan.selected();
  const auto s2 = identified_loci(scan);
  MultilocusOutcome o;
  o.replicate = replicate;
  o.selected = s1.size();
  for (std::size_t j = 0; j < data.regions.size(); ++j) {
    const auto r = static_cast<std::size_t>(data.regions[j]);
    if (r > 2) continue;
    ++o.region_size[r];
    if (contains(s1, j)) o.stage1_region[r] += 1.0;
    if (contains(s2, j)) o.stage2_region[r] += 1.0;
  }
  for (int r = 0; r < 3; ++r) {
    if (o.region_size[r] == 0) continue;
    o.stage1_region[r] /= static_cast<double>(o.region_size[r]);
    o.stage2_region[r] /= static_cast<double>(o.region_size[r]);
  }
  const bool a1 = contains(s1, l1), b1 = contains(s1, l2);
  o.stage1_pair = a1 && b1;
  o.stage1_locus1_only = a1 && !b1;
  o.stage1_locus2_only = b1 && !a1;
  const bool a2 = contains(s2, l1), b2 = contains(s2, l2);
  o.stage2_pair = a2 && b2;
  o.stage2_locus1_only = a2 && !b2;
  o.stage2_locus2_only = b2 && !a2;
  o.stage2_pair_top = !scan.subsets.empty() && scan.subsets.front().loci == std::vector<std::size_t>{l1, l2} &&
                      scan.subsets.front().log10_bf > scan.delta;
  return o;
}

ExperimentTables run_experiment(const SimScenario& scenario, const ScanOptions& options, unsigned workers,
                                const BlockGenerator& generator) {
  scenario.validate();
  const std::size_t R = scenario.replicates;
  ExperimentTables t;
  switch (scenario.kind) {
    case ScenarioKind::Null: {
      std::vector<NullOutcome> out(R);
      parallel_for(R, workers, [&](std::size_t r) { out[r] = score_null_replicate(scenario, r, options); });
      t.replicates = "replicate\tloci\tselected\tskipped\ttype1_rate\n";
      std::vector<double> rates;
      for (const auto& o : out) {
        t.replicates += fmt::format("{}\t{}\t{}\t{}\t{}\n", o.replicate, o.loci, o.selected, o.skipped, format_real(o.rate));
        rates.push_back(o.rate);
      }
      std::sort(rates.begin(), rates.end());
      const double median = R % 2 ? rates[R / 2] : 0.5 * (rates[R / 2 - 1] + rates[R / 2]);
      t.summary = "statistic\tvalue\n";
      t.summary += fmt::format("median_type1_rate\t{}\nmax_type1_rate\t{}\nmin_type1_rate\t{}\n", format_real(median),
                               format_real(rates.back()), format_real(rates.front()));
      break;
    }
    case ScenarioKind::SingleLocus: {
      std::vector<PowerOutcome> out(R);
      parallel_for(R, workers, [&](std::size_t r) { out[r] = score_power_replicate(scenario, r, options); });
      t.replicates = "replicate\tcausal_index\tpaap\tbeta\tlog10_bf\tdetected\n";
      std::size_t hits = 0;
      for (const auto& o : out) {
        t.replicates += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", o.replicate, o.causal, format_real(o.paap),
                                    format_real(o.beta), format_real(o.log10_bf), o.detected ? 1 : 0);
        hits += o.detected ? 1 : 0;
      }
      t.summary = "statistic\tvalue\n";
      t.summary += fmt::format("power\t{}\n", format_real(static_cast<double>(hits) / static_cast<double>(R)));
      break;
    }
    case ScenarioKind::Multilocus: {
      std::vector<MultilocusOutcome> out(R);
      parallel_for(R, workers, [&](std::size_t r) { out[r] = score_multilocus_replicate(scenario, r, options, generator); });
      t.replicates =
          "replicate\treg1_size\treg2_size\treg3_size\tselected\t"
          "s1_reg1\ts1_reg2\ts1_reg3\ts1_locus1\ts1_locus2\ts1_pair\t"
          "s2_reg1\ts2_reg2\ts2_reg3\ts2_locus1\ts2_locus2\ts2_pair\ts2_pair_top\n";
      double s1[3] = {0, 0, 0}, s2[3] = {0, 0, 0};
      double c1[3] = {0, 0, 0}, c2[4] = {0, 0, 0, 0};
      for (const auto& o : out) {
        t.replicates += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", o.replicate,
                                    o.region_size[0], o.region_size[1], o.region_size[2], o.selected,
                                    format_real(o.stage1_region[0]), format_real(o.stage1_region[1]),
                                    format_real(o.stage1_region[2]), int(o.stage1_locus1_only),
                                    int(o.stage1_locus2_only), int(o.stage1_pair), format_real(o.stage2_region[0]),
                                    format_real(o.stage2_region[1]), format_real(o.stage2_region[2]),
                                    int(o.stage2_locus1_only), int(o.stage2_locus2_only), int(o.stage2_pair),
                                    int(o.stage2_pair_top));
        for (int r = 0; r < 3; ++r) {
          s1[r] += o.stage1_region[r];
          s2[r] += o.stage2_region[r];
        }
        c1[0] += o.stage1_locus1_only;
        c1[1] += o.stage1_locus2_only;
        c1[2] += o.stage1_pair;
        c2[0] += o.stage2_locus1_only;
        c2[1] += o.stage2_locus2_only;
        c2[2] += o.stage2_pair;
        c2[3] += o.stage2_pair_top;
      }
      const double n = static_cast<double>(R);
      t.summary = "method\tREG1\tREG2\tREG3\tLocus1\tLocus2\tLocus1/2\tpair_top\n";
      t.summary += fmt::format("stage1\t{}\t{}\t{}\t{}\t{}\t{}\tNA\n", format_real(s1[0] / n), format_real(s1[1] / n),
                               format_real(s1[2] / n), format_real(c1[0] / n), format_real(c1[1] / n),
                               format_real(c1[2] / n));
      t.summary += fmt::format("stage2\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", format_real(s2[0] / n), format_real(s2[1] / n),
                               format_real(s2[2] / n), format_real(c2[0] / n), format_real(c2[1] / n),
                               format_real(c2[2] / n), format_real(c2[3] / n));
      break;
    }
  }
  return t;
}

}  // namespace gleam
