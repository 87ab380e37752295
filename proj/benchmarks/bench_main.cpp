#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "dnar/hydro1d.hpp"
#include "dnar/particle.hpp"
#include "dnar/transport.hpp"

using namespace dnar;

namespace {

particle::Ensemble ensemble(int n, int d) {
  particle::Ensemble e(d, n);
  particle::sample(e.x, n, d, particle::Layout::Gaussian, 0.0, 1.0, 1);
  particle::sample(e.v, n, d, particle::Layout::Gaussian, 0.0, 1.0, 2);
  particle::sample(e.omega, n, d, particle::Layout::Gaussian, 0.0, 1.0, 3);
  return e;
}

void BM_DnarVelocity(benchmark::State& state) {
  const auto e = ensemble(static_cast<int>(state.range(0)), 2);
  const auto k = kernel::KernelSpec::smooth_compact(1.0, 1.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(particle::dnar_velocity(e, k));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DnarVelocity)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNSquared);

void BM_AlignmentRhs(benchmark::State& state) {
  const auto e = ensemble(static_cast<int>(state.range(0)), 2);
  const auto psi = kernel::MatrixWeightSpec::from_kernel(kernel::KernelSpec::smooth_compact(1.0, 1.0, 2));
  for (auto _ : state) benchmark::DoNotOptimize(particle::cs_rhs(e, psi));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AlignmentRhs)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNSquared);

void BM_W2Assignment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = transport::empirical_positions(ensemble(n, 2));
  auto b = a;
  for (auto& z : b.points) z = std::sin(3.0 * z);
  for (auto _ : state) benchmark::DoNotOptimize(transport::w2(a, b).distance);
}
BENCHMARK(BM_W2Assignment)->RangeMultiplier(2)->Range(16, 256);

void BM_W2General(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = transport::empirical_positions(ensemble(n, 2));
  const auto b = transport::empirical_positions(ensemble(n + 3, 2));
  for (auto _ : state) benchmark::DoNotOptimize(transport::w2(a, b).distance);
}
BENCHMARK(BM_W2General)->RangeMultiplier(2)->Range(16, 128);

void BM_DblOneDimensional(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = transport::empirical_positions(ensemble(n, 1));
  const auto b = transport::empirical_positions(ensemble(4096, 1));
  for (auto _ : state) benchmark::DoNotOptimize(transport::dbl(a, b));
}
BENCHMARK(BM_DblOneDimensional)->Arg(100)->Arg(800);

void BM_HydroStep(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  hydro::GridField1D f;
  f.rho.resize(m);
  f.w.resize(m);
  for (int i = 0; i < m; ++i) {
    f.rho[i] = 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * f.center(i));
    f.w[i] = 0.05 * std::sin(2.0 * std::numbers::pi * f.center(i));
  }
  const hydro::Solver solver(hydro::HydroConfig{}, 1.0, m);
  const double dt = solver.stable_dt(f);
  for (auto _ : state) {
    auto g = f;
    solver.step(g, dt);
    benchmark::DoNotOptimize(g.rho.data());
  }
}
BENCHMARK(BM_HydroStep)->RangeMultiplier(4)->Range(256, 16384);

}  // namespace

BENCHMARK_MAIN();
