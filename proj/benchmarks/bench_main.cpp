#include <benchmark/benchmark.h>

#include "gleam/hmm_sampler.hpp"
#include "gleam/mapping.hpp"
#include "gleam/simgen.hpp"

namespace {

using namespace gleam;

void BM_ffbs(benchmark::State& state) {
  const auto J = static_cast<std::size_t>(state.range(0));
  Rng rng = make_stream(1, {});
  std::vector<std::uint8_t> x(J), r(J), path(J);
  std::vector<double> pA(J, 0.8), pB(J, 0.2);
  for (std::size_t j = 0; j < J; ++j) {
    x[j] = static_cast<std::uint8_t>(draw_categorical(std::vector<double>{1, 2, 1}, rng));
    r[j] = static_cast<std::uint8_t>(draw_categorical(std::vector<double>{8, 1, 1}, rng));
  }
  const ChainSlice chain{x, r, pA, pB, 0.8, 0};
  for (auto _ : state) {
    ffbs_sample_path(chain, path, rng);
    benchmark::DoNotOptimize(path.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(J));
}
BENCHMARK(BM_ffbs)->Arg(100)->Arg(1000);

void BM_sweep(benchmark::State& state) {
  const std::size_t I = 200, J = 100;
  std::vector<Marker> m(J);
  for (std::size_t j = 0; j < J; ++j) m[j] = {"m" + std::to_string(j), 1, 0.01 * double(j), 0.8, 0.2};
  const AimPanel panel(std::move(m));
  GenotypeMatrix g(I, J);
  Rng rng = make_stream(2, {});
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j) g(i, j) = static_cast<std::uint8_t>(draw_categorical(std::vector<double>{1, 2, 1}, rng));
  AncestrySampler sampler(panel, g, HmmHyperparams{});
  std::uint64_t t = 0;
  for (auto _ : state) sampler.sweep(t++, false);
}
BENCHMARK(BM_sweep)->Unit(benchmark::kMillisecond);

void BM_fit_glm(benchmark::State& state) {
  const auto kind = static_cast<TraitKind>(state.range(0));
  Rng rng = make_stream(3, {});
  const std::vector<double> p{0.8};
  const auto S = sample_ancestry_hwe(p, 1000, rng);
  const std::vector<CausalEffect> eff{{0, 0.3}};
  const auto trait = simulate_traits(S, eff, 1.0, kind, rng);
  const auto design = center_ancestries(S, {0});
  for (auto _ : state) benchmark::DoNotOptimize(fit_glm(trait, design));
}
BENCHMARK(BM_fit_glm)->Arg(0)->Arg(1)->Arg(2);

void BM_stage1(benchmark::State& state) {
  SimScenario s;
  s.subjects = 500;
  s.loci = 200;
  const auto d = generate_replicate(s, 0);
  const auto draws = as_draws(d.ancestry);
  ScanOptions o;
  o.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stage1_scan(draws, d.trait, o));
}
BENCHMARK(BM_stage1)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
