#include <benchmark/benchmark.h>

#include <cmath>

#include "dlambert/lambert.hpp"
#include "dlambert/levi_civita.hpp"
#include "dlambert/oracle.hpp"
#include "dlambert/rectilinear.hpp"

using namespace dlambert;

namespace {

LambertProblem quarter_circle(double d) {
  LambertProblem p;
  p.A = {1, 0};
  p.B = {0, 1};
  p.T = kPi / 2;
  p.field = d > 0.0 ? FrictionField::constant(d) : FrictionField::zero();
  return p;
}

void BM_IntegrateBackward(benchmark::State& state) {
  const auto field = FrictionField::radial_exp(0.2, 0.5);
  const State s0{{1, 0}, {0.1, 1.1}};
  for (auto _ : state) benchmark::DoNotOptimize(integrate_backward(field, s0, 2.0 * kPi));
}
BENCHMARK(BM_IntegrateBackward);

void BM_ShootWithJacobian(benchmark::State& state) {
  const auto p = quarter_circle(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(shoot(p, {-1.0, 0.05}));
}
BENCHMARK(BM_ShootWithJacobian);

void BM_RegularizedPlanar(benchmark::State& state) {
  const auto lc0 = goursat_planar({1, 0}, {1.4, 0.01});
  const auto field = FrictionField::constant(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_lc_planar_backward(field, lc0, 2.0));
}
BENCHMARK(BM_RegularizedPlanar);

void BM_SolveRectilinear(benchmark::State& state) {
  RadialProblem p;
  p.field = FrictionField::constant(0.2);
  p.r_A = 2.0;
  p.r_B = 1.0;
  p.T = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_rectilinear(p));
}
BENCHMARK(BM_SolveRectilinear);

// Full solve (both senses of rotation, continuation plus verification).
void BM_SolveQuarterCircle(benchmark::State& state) {
  const auto p = quarter_circle(static_cast<double>(state.range(0)) / 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_SolveQuarterCircle)->Arg(0)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_OracleLambert(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(lambert_universal({1, 0}, {0.3, 1.7}, 2.3, Rotation::kCW));
}
BENCHMARK(BM_OracleLambert);

void BM_OraclePropagate(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(propagate_universal({1, 0}, {0.2, 1.3}, -7.5));
}
BENCHMARK(BM_OraclePropagate);

}  // namespace

BENCHMARK_MAIN();
