#include <benchmark/benchmark.h>

#include "mrsabr/calibration.hpp"
#include "mrsabr/closed_forms.hpp"
#include "mrsabr/oracle.hpp"
#include "mrsabr/sabr_kernel.hpp"

namespace {

mrsabr::ModelParams params(mrsabr::Model m) { return {m, 0.25, 0.18, 6.0, 1.4, -0.6}; }

void BM_BlackVol(benchmark::State& state) {
  const mrsabr::StdSabrParams p{0.2, -0.4, 0.8, 1.0};
  double k = 80.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mrsabr::black_vol_lognormal_sabr(p, {100.0, k}));
    k = k < 120.0 ? k + 0.5 : 80.0;
  }
}
BENCHMARK(BM_BlackVol);

void BM_ClosedForm(benchmark::State& state) {
  const auto p = params(static_cast<mrsabr::Model>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mrsabr::effective_coeffs(p, 1.0));
  state.SetLabel(std::string(mrsabr::to_string(p.model)));
}
BENCHMARK(BM_ClosedForm)->DenseRange(0, 2);

void BM_Oracle(benchmark::State& state) {
  const auto p = params(static_cast<mrsabr::Model>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mrsabr::oracle_coeffs(p, 1.0));
  state.SetLabel(std::string(mrsabr::to_string(p.model)));
}
BENCHMARK(BM_Oracle)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_Objective(benchmark::State& state) {
  const auto p = params(mrsabr::Model::MRSABR);
  const auto s = mrsabr::synthetic_surface(p, "2024-01-02", {0.25, 0.5, 1.0}, {80, 90, 100, 110, 120});
  for (auto _ : state) benchmark::DoNotOptimize(mrsabr::rmse_objective(p, s));
}
BENCHMARK(BM_Objective)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
