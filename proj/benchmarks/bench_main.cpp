#include <benchmark/benchmark.h>

#include "micronip/kbkz.hpp"
#include "micronip/nip.hpp"
#include "micronip/polyfit.hpp"

using namespace micronip;

namespace {

KbkzParams fluid(int k) {
  static const double alpha[] = {0.0013, 8.91, 15.7};
  static const double eta[] = {0.15, 0.3, 0.7};
  return KbkzParams::single_mode(eta[k], 0.01, alpha[k]);
}

void BM_SteadyShearPoint(benchmark::State& state) {
  const auto p = fluid(2);
  const double rate = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(steady_shear_point(p, rate));
}
BENCHMARK(BM_SteadyShearPoint)->Arg(1)->Arg(1000)->Arg(100000);

void BM_ExtensionalViscosity(benchmark::State& state) {
  const auto p = fluid(1);
  for (auto _ : state) benchmark::DoNotOptimize(extensional_viscosity(p, 20.0));
}
BENCHMARK(BM_ExtensionalViscosity);

void BM_FitSingleMode(benchmark::State& state) {
  const auto data = synthesize_dataset(fluid(1), log_grid(1e-1, 1e5, 20), 0.01, 1);
  FitOptions opts;
  opts.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(fit_steady_shear(data, 1, opts));
}
BENCHMARK(BM_FitSingleMode)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SolveReynoldsNewtonian(benchmark::State& state) {
  const NipGeometry g;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_reynolds(g, Newtonian{0.15}, OutletCondition::SwiftStieber, n));
  }
}
BENCHMARK(BM_SolveReynoldsNewtonian)->Arg(801)->Arg(3201)->Unit(benchmark::kMillisecond);

void BM_SolveReynoldsKbkz(benchmark::State& state) {
  const NipGeometry g;
  const FluidModel f = GeneralizedNewtonian{fluid(2)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_reynolds(g, f, OutletCondition::SwiftStieber, 801));
  }
}
BENCHMARK(BM_SolveReynoldsKbkz)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
