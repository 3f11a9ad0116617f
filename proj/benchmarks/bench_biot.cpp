// Microbenchmarks for the hot paths: form assembly, the symmetric
// factorizations and one global-in-time sweep. Argument: mesh divisor.

#include <benchmark/benchmark.h>

#include "biot/algorithms.hpp"

namespace biot {
namespace {

void BM_AssembleA1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = build_unit_square_mesh(n);
  const DofLayout v(mesh, SpaceKind::P2Vector);
  const PhysicalParams prm;
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_form(FormId::A1, mesh, v, v, prm));
  }
  state.counters["dofs"] = static_cast<double>(v.num_dofs());
}
BENCHMARK(BM_AssembleA1)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SystemSetup(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const BiotSystem sys(example1_problem(), n);
    benchmark::DoNotOptimize(sys.num_u());
  }
}
BENCHMARK(BM_SystemSetup)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FactorStokes(benchmark::State& state) {
  const BiotSystem sys(example1_problem(), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    sys.release_solvers();
    benchmark::DoNotOptimize(&sys.stokes());
  }
}
BENCHMARK(BM_FactorStokes)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FactorCoupled(benchmark::State& state) {
  const BiotSystem sys(example1_problem(), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    sys.release_solvers();
    benchmark::DoNotOptimize(&sys.coupled(1.0 / 16));
  }
}
BENCHMARK(BM_FactorCoupled)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// One iteration over 16 levels with factorizations cached; the second
// argument is the worker count of step b.
void BM_GlobalSweep(benchmark::State& state) {
  const BiotSystem sys(example1_problem(), static_cast<int>(state.range(0)));
  const TimeGrid grid(1.0, 16);
  RunOptions o;
  o.control.max_iters = 1;
  o.control.stop_on_tolerance = false;
  o.control.record_history = false;
  o.workers = static_cast<int>(state.range(1));
  (void)sys.initial_state();
  (void)sys.stokes();
  (void)sys.reaction_diffusion(grid.dt());
  for (auto _ : state) {
    benchmark::DoNotOptimize(git_decoupled_run(sys, grid, o).final_state.t);
  }
}
BENCHMARK(BM_GlobalSweep)->Args({32, 1})->Args({32, 4})->Args({64, 1})->Args({64, 4})
    ->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
}  // namespace biot

BENCHMARK_MAIN();
