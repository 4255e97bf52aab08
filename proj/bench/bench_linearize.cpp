// Serial vs OpenMP linearization of the full smoothing problem.

#include <benchmark/benchmark.h>

#include "legged/experiment/pipeline.hpp"

namespace {

struct Fixture {
  legged::Problem problem;
  explicit Fixture(double duration, legged::JacobianMode mode) : mode(mode) {
    legged::SimConfig sim;
    sim.duration = duration;
    const legged::Dataset clean = legged::generate_truth(sim).dataset;
    const legged::Dataset noisy = legged::corrupt(clean, sim.noise, 7);
    legged::EstimatorConfig est;
    est.preset = legged::RunPreset::All;
    problem = legged::build_problem(noisy, est);
  }
  legged::JacobianMode mode;
};

const Fixture& fixture(int seconds, legged::JacobianMode mode) {
  static const Fixture analytic20(20.0, legged::JacobianMode::Analytic);
  static const Fixture analytic60(60.0, legged::JacobianMode::Analytic);
  static const Fixture numeric60(60.0, legged::JacobianMode::Numeric);
  if (mode == legged::JacobianMode::Numeric) return numeric60;
  return seconds <= 20 ? analytic20 : analytic60;
}

template <legged::Execution Exec, legged::JacobianMode Mode>
void BM_Linearize(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)), Mode);
  for (auto _ : state) {
    auto sys = legged::linearize(f.problem.graph, f.problem.initial, Mode, Exec);
    benchmark::DoNotOptimize(sys.cost);
  }
  state.counters["factors"] = static_cast<double>(f.problem.graph.size());
}

}  // namespace

BENCHMARK(BM_Linearize<legged::Execution::Serial, legged::JacobianMode::Analytic>)
    ->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Linearize<legged::Execution::Parallel, legged::JacobianMode::Analytic>)
    ->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Linearize<legged::Execution::Serial, legged::JacobianMode::Numeric>)
    ->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Linearize<legged::Execution::Parallel, legged::JacobianMode::Numeric>)
    ->Arg(60)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
