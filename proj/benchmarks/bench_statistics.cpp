// Microbenchmarks for the closed-form statistics, the Kummer function and the
// CF-inversion likelihood.

#include <benchmark/benchmark.h>

#include "sfgof/cf_test.hpp"
#include "sfgof/estimation.hpp"
#include "sfgof/mgf_test.hpp"
#include "sfgof/model.hpp"
#include "sfgof/special_functions.hpp"

namespace {

using namespace sfgof;

std::vector<double> draws(std::size_t n, const ErrorParams& params) {
  Rng rng(1);
  return std::visit([&](const auto& p) { return sample_errors(p, n, rng); }, params);
}

void BM_MgfStatisticClosed(benchmark::State& state) {
  mgf::StandardizedResiduals res;
  res.r = draws(static_cast<std::size_t>(state.range(0)), NormalGammaParams{1.0, 1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(mgf::statistic_closed(res, 4.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MgfStatisticClosed)->RangeMultiplier(2)->Range(50, 800)->Complexity(benchmark::oNSquared);

void BM_MgfStatisticQuadrature(benchmark::State& state) {
  mgf::StandardizedResiduals res;
  res.r = draws(static_cast<std::size_t>(state.range(0)), NormalGammaParams{1.0, 1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(mgf::statistic_quadrature(res, 4.0));
}
BENCHMARK(BM_MgfStatisticQuadrature)->Arg(100);

void BM_CfStatisticClosed(benchmark::State& state) {
  cf::CfStandardizedResiduals res;
  res.r = draws(static_cast<std::size_t>(state.range(0)), StableGammaParams{1.0, 1.8, 1.0, 1.0});
  res.alpha_hat = 1.8;
  for (auto _ : state) benchmark::DoNotOptimize(cf::statistic_closed(res, 4.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CfStatisticClosed)->RangeMultiplier(2)->Range(50, 800)->Complexity(benchmark::oNSquared);

void BM_KummerScaled(benchmark::State& state) {
  const double z = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(special::kummer_1f1_scaled(0.4, 1.5, z));
}
BENCHMARK(BM_KummerScaled)->Arg(1)->Arg(30)->Arg(200);

void BM_LogLikelihood(benchmark::State& state) {
  const StableGammaParams params{1.0, 1.8, 1.0, 1.0};
  const Sample sample = location_sample(draws(200, params));
  const RegressionModel model{Eigen::VectorXd::Zero(1), params, SignConvention::production};
  est::GridOptions grid;
  grid.n_points = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(est::log_likelihood(model, sample, grid));
}
BENCHMARK(BM_LogLikelihood)->Arg(1 << 12)->Arg(1 << 14);

}  // namespace

BENCHMARK_MAIN();
