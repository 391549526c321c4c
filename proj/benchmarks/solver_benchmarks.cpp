#include <benchmark/benchmark.h>

#include <vector>

#include "mdpdesign/generator.hpp"
#include "mdpdesign/mdp.hpp"
#include "mdpdesign/oracle.hpp"
#include "mdpdesign/reformulation.hpp"

using namespace mdpdesign;

namespace {

GenParams params(int n, int K, int S, int A, std::uint64_t seed = 1) {
  GenParams p;
  p.n = n;
  p.m = 4;
  p.num_scenarios = K;
  p.num_states = S;
  p.num_actions = A;
  p.seed = seed;
  return p;
}

const ScenarioMdp& first_scenario(int S, int A) {
  static std::vector<DesignMdpInstance> cache;
  for (const auto& inst : cache)
    if (inst.scenarios()[0].num_states() == S && inst.scenarios()[0].num_actions() == A) return inst.scenarios()[0];
  cache.push_back(generate_instance(params(2, 1, S, A)));
  return cache.back().scenarios()[0];
}

void BM_PolicyIteration(benchmark::State& state) {
  const auto& mdp = first_scenario(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const std::vector<double> x(mdp.design_dim(), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(policy_iteration(mdp, x));
}
BENCHMARK(BM_PolicyIteration)->Args({10, 5})->Args({40, 5})->Args({10, 20})->Args({80, 10});

void BM_ValueIteration(benchmark::State& state) {
  const auto& mdp = first_scenario(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const std::vector<double> x(mdp.design_dim(), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(mdp, x, 1e-8));
}
BENCHMARK(BM_ValueIteration)->Args({10, 5})->Args({40, 5})->Args({10, 20});

void BM_PrimalLp(benchmark::State& state) {
  const auto& mdp = first_scenario(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto lp = build_primal_lp(mdp, std::vector<double>(mdp.design_dim(), 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(lp));
}
BENCHMARK(BM_PrimalLp)->Args({10, 5})->Args({20, 10})->Args({40, 5});

void BM_GenerateInstance(benchmark::State& state) {
  auto p = params(20, 20, 10, 20);
  p.m = 40;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_instance(p));
    ++p.seed;
  }
}
BENCHMARK(BM_GenerateInstance);

void BM_SolveIntegrated(benchmark::State& state) {
  const auto inst = generate_instance(params(4, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 2));
  const auto kind = state.range(2) == 0 ? BigMKind::Uniform : BigMKind::PerStateLp;
  for (auto _ : state) benchmark::DoNotOptimize(solve_integrated(inst, kind));
}
BENCHMARK(BM_SolveIntegrated)
    ->ArgsProduct({{1, 2, 4}, {2, 4}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  const auto inst = generate_instance(params(static_cast<int>(state.range(0)), 2, 4, 3));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_solve(inst));
}
BENCHMARK(BM_BruteForce)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
