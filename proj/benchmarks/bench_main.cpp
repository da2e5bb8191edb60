#include <vector>

#include <benchmark/benchmark.h>

#include "catseries/dar.hpp"
#include "catseries/estimate.hpp"
#include "catseries/glm.hpp"
#include "catseries/independence.hpp"
#include "catseries/montecarlo.hpp"

using namespace catseries;

namespace {

Eigen::VectorXd uniform(int k) { return Eigen::VectorXd::Constant(k, 1.0 / k); }

void BM_Simulate(benchmark::State& state) {
  const DarModel model(0.5, uniform(3));
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(model, n, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(100)->Arg(10000);

void BM_AlphaMle(benchmark::State& state) {
  const auto s = simulate(DarModel(0.5, uniform(3)), static_cast<std::size_t>(state.range(0)), 2);
  const auto pi = estimate_pi(s).pi_hat;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_alpha_mle(s, pi));
}
BENCHMARK(BM_AlphaMle)->Arg(500);

void BM_AlphaLs(benchmark::State& state) {
  const auto s = simulate(DarModel(0.5, uniform(3)), static_cast<std::size_t>(state.range(0)), 2);
  const auto pi = estimate_pi(s).pi_hat;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_alpha_ls(s, pi));
}
BENCHMARK(BM_AlphaLs)->Arg(500);

void BM_AlphaMleGapped(benchmark::State& state) {
  const auto s = simulate_with_missing(MissingDarModel(DarModel(0.5, uniform(3)), 0.5), static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_alpha_mle_gapped(s));
}
BENCHMARK(BM_AlphaMleGapped)->Arg(50)->Arg(500);

void BM_IndependenceTests(benchmark::State& state) {
  const auto s = simulate(DarModel(0.2, uniform(3)), 500, 4);
  const auto pi = estimate_pi(s).pi_hat;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chi_square_test(s, 0.05));
    benchmark::DoNotOptimize(runs_count_test(s, pi, 0.05, true));
    benchmark::DoNotOptimize(longest_run_test(s, pi, 0.05));
  }
}
BENCHMARK(BM_IndependenceTests);

void BM_FitGlm(benchmark::State& state) {
  const auto family = state.range(0) == 0 ? GlmFamily::MultinomialLogit : GlmFamily::ProportionalOdds;
  const auto design = build_design(simulate(DarModel(0.5, uniform(4)), 200, 5), 2);
  for (auto _ : state) benchmark::DoNotOptimize(fit_glm(design, family));
}
BENCHMARK(BM_FitGlm)->Arg(0)->Arg(1);

void BM_RunGrid(benchmark::State& state) {
  auto grid = SimGrid::reference();
  grid.m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_grid(grid, 1));
}
BENCHMARK(BM_RunGrid)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
