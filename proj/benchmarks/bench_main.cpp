#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "heterovol/correlations.hpp"
#include "heterovol/empirical.hpp"
#include "heterovol/gmm.hpp"
#include "heterovol/moments.hpp"
#include "heterovol/simulator.hpp"
#include "heterovol/weighting.hpp"

using namespace heterovol;

namespace {

FullParams table1() { return expand(sp500_1970_2010_estimates()); }

const std::vector<ReturnSeries>& sample() {
  static const std::vector<ReturnSeries> rets = [] {
    SimConfig c;
    c.n_paths = 4;
    c.horizon = 20.0;
    c.seed = 1;
    auto r = extract_returns(simulate(table1(), c));
    for (auto& s : r) s.mu = sp500_1970_2010_estimates().mu;
    return r;
  }();
  return rets;
}

void BM_CoefficientSet(benchmark::State& state) {
  FullParams p = table1();
  p.t0 = -1.0;
  p.y0 = 0.2;
  p.z0 = 0.03;
  for (auto _ : state) benchmark::DoNotOptimize(CoefficientSet(4, 4, p));
}
BENCHMARK(BM_CoefficientSet);

void BM_LeverageCurve(benchmark::State& state) {
  const FullParams p = table1();
  std::vector<double> lags;
  for (int k = 1; k <= 250; ++k) lags.push_back(k);
  for (auto _ : state) benchmark::DoNotOptimize(leverage_curve(lags, p));
}
BENCHMARK(BM_LeverageCurve);

void BM_AcfCurve(benchmark::State& state) {
  const FullParams p = table1();
  std::vector<double> lags;
  for (int k = 1; k <= 250; ++k) lags.push_back(k);
  for (auto _ : state) benchmark::DoNotOptimize(acf_curve(lags, p));
}
BENCHMARK(BM_AcfCurve);

void BM_SimulateYear(benchmark::State& state) {
  SimConfig c;
  c.n_paths = static_cast<std::size_t>(state.range(0));
  c.horizon = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(table1(), c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateYear)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MomentData(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(MomentData(sample(), {1, 250, 51, 250}));
}
BENCHMARK(BM_MomentData)->Unit(benchmark::kMillisecond);

void BM_Objective(benchmark::State& state) {
  const MomentData data(sample(), {1, 250, 51, 250});
  const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(454, 454);
  const ReducedParams theta = sp500_1970_2010_estimates();
  for (auto _ : state) benchmark::DoNotOptimize(objective(theta, data, W));
}
BENCHMARK(BM_Objective);

void BM_WeightingMatrix(benchmark::State& state) {
  const MomentData data(sample(), {1, 250, 51, 250});
  const Weighting w{state.range(0) == 0 ? WeightingMode::Outer : WeightingMode::NeweyWest,
                    static_cast<int>(state.range(0))};
  const ReducedParams theta = sp500_1970_2010_estimates();
  for (auto _ : state) benchmark::DoNotOptimize(weighting_matrix(data, theta, w));
}
BENCHMARK(BM_WeightingMatrix)->Arg(0)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_InverseWeighting(benchmark::State& state) {
  const MomentData data(sample(), {1, 250, 51, 250});
  const Eigen::MatrixXd omega =
      weighting_matrix(data, sp500_1970_2010_estimates(), {WeightingMode::Outer, 0});
  for (auto _ : state) benchmark::DoNotOptimize(inverse_weighting(omega));
}
BENCHMARK(BM_InverseWeighting)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
