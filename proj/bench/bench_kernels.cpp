// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "cptlab/choquet.hpp"
#include "cptlab/kernels.hpp"
#include "cptlab/optimizer.hpp"

using namespace cptlab;

namespace {

double ladder_pair(double x, double y) {
  const double b[] = {x, y};
  return ladder_objective(b);
}

void BM_GridArgmax(benchmark::State& state, bool parallel) {
  const double step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    const auto g = parallel ? kernels::grid_argmax_2d(ladder_pair, 0.0, 1.0, step)
                            : kernels::serial::grid_argmax_2d(ladder_pair, 0.0, 1.0, step);
    benchmark::DoNotOptimize(g.value);
  }
  state.SetItemsProcessed(state.iterations() * (state.range(0) + 1) * (state.range(0) + 1));
}

struct TkInstance {
  ScenarioTree tree = build_iid_market({{0.3, {1.2}}, {0.4, {0.1}}, {0.3, {-1.0}}}, 4);
  PreferenceSpec pref = PreferenceSpec::tversky_kahneman();
  ReferenceSpec ref = ReferenceSpec::constant(tree, 0.0);
  CptEvaluator eval{tree, 1.0, ref, pref};
};

const TkInstance& instance() {
  static const TkInstance inst;
  return inst;
}

void BM_EvaluateBatch(benchmark::State& state, bool parallel) {
  const auto& inst = instance();
  const Objective f = [&inst](std::span<const double> x) { return inst.eval.value(x); };
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  std::vector<Vec> candidates(static_cast<std::size_t>(state.range(0)));
  for (auto& c : candidates) {
    c.resize(inst.eval.dimension());
    for (auto& v : c) v = unit(rng);
  }
  for (auto _ : state) {
    const auto values = parallel ? kernels::evaluate_batch(f, candidates)
                                 : kernels::serial::evaluate_batch(f, candidates);
    benchmark::DoNotOptimize(values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Multistart(benchmark::State& state, bool parallel) {
  const auto& inst = instance();
  const Objective f = [&inst](std::span<const double> x) { return inst.eval.value(x); };
  const std::size_t dim = inst.eval.dimension();
  const Box box{Vec(dim, -4.0), Vec(dim, 4.0)};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(-4.0, 4.0);
  std::vector<Vec> starts(static_cast<std::size_t>(state.range(0)));
  for (auto& s : starts) {
    s.resize(dim);
    for (auto& v : s) v = unit(rng);
  }
  CompassOptions opts;
  opts.initial_step = 1.0;
  opts.min_step = 1e-6;
  for (auto _ : state) {
    const auto best = parallel ? kernels::multistart(f, starts, box, opts)
                               : kernels::serial::multistart(f, starts, box, opts);
    benchmark::DoNotOptimize(best.value);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_GridArgmax, serial, false)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GridArgmax, openmp, true)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_EvaluateBatch, serial, false)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_EvaluateBatch, openmp, true)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Multistart, serial, false)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Multistart, openmp, true)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
