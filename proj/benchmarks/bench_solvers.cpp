#include <benchmark/benchmark.h>

#include "queuetoll/continuum.hpp"
#include "queuetoll/model.hpp"
#include "queuetoll/pricing.hpp"
#include "queuetoll/simulator.hpp"
#include "queuetoll/social_opt.hpp"
#include "queuetoll/wardrop.hpp"

namespace {

using namespace queuetoll;

SystemSpec five_queues() {
  std::vector<ClassSpec> classes = {{1, 5, 1}, {1, 4, 1}, {1, 3, 1}, {1, 2, 1}, {1, 1, 1}};
  std::vector<CostModel> queues = {
      CostModel::mm1_mean_delay(2.0), CostModel::mm1_mean_delay(3.0),
      CostModel::mm1_mean_delay(2.5), CostModel::mm1_mean_delay(1.1),
      CostModel::mm1_mean_delay(1.5)};
  return {classes, queues};
}

RoutingMatrix five_queue_optimum() {
  return RoutingMatrix({{0.0, 1.0, 0.0, 0.0, 0.0},
                        {0.0, 0.528, 0.472, 0.0, 0.0},
                        {0.212, 0.0, 0.788, 0.0, 0.0},
                        {0.786, 0.0, 0.0, 0.0, 0.214},
                        {0.0, 0.0, 0.0, 0.483, 0.517}});
}

void BM_SocialCostGradient(benchmark::State& state) {
  const SystemSpec spec = five_queues();
  const RoutingMatrix routing = five_queue_optimum();
  for (auto _ : state) benchmark::DoNotOptimize(social_cost_gradient(spec, routing));
}
BENCHMARK(BM_SocialCostGradient);

void BM_SocialOptimum(benchmark::State& state) {
  const SystemSpec spec = five_queues();
  SocialOptOptions options;
  options.restarts = static_cast<int>(state.range(0));
  options.parallel = false;  // measure the solver, not the thread pool
  for (auto _ : state) benchmark::DoNotOptimize(solve_social_optimum(spec, options));
}
BENCHMARK(BM_SocialOptimum)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Equilibrium(benchmark::State& state) {
  const SystemSpec spec = five_queues();
  const PriceVector prices({2.57, 1.53, 0.7, 0.42, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(solve_equilibrium(spec, prices));
}
BENCHMARK(BM_Equilibrium)->Unit(benchmark::kMillisecond);

void BM_PigouvianPrices(benchmark::State& state) {
  const SystemSpec spec = five_queues();
  const RoutingMatrix routing = five_queue_optimum();
  for (auto _ : state) {
    benchmark::DoNotOptimize(pigouvian_prices(spec, routing));
  }
}
BENCHMARK(BM_PigouvianPrices);

void BM_ContinuumOptimum(benchmark::State& state) {
  const ContinuumSpec spec{1.2, SensitivityDistribution::uniform(0.0, 4.0),
                           {CostModel::mm1_mean_delay(2.2), CostModel::mm1_mean_delay(1.6),
                            CostModel::mm1_mean_delay(1.0)}};
  for (auto _ : state) benchmark::DoNotOptimize(solve_continuum_optimum(spec));
}
BENCHMARK(BM_ContinuumOptimum)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const SystemSpec spec = five_queues();
  const RoutingMatrix routing = five_queue_optimum();
  SimConfig cfg;
  cfg.horizon = static_cast<double>(state.range(0));
  cfg.parallel = false;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(spec, routing, cfg));
}
BENCHMARK(BM_Simulate)->Arg(10000)->Arg(40000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
