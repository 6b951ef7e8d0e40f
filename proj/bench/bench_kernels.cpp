// Serial vs OpenMP throughput of the two data-parallel kernels: swarm
// objective evaluation and posterior draws of the entropic bound. Both paths
// produce bit-identical output; only the schedule differs.
//
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qfp/biphoton.hpp"
#include "qfp/inference.hpp"
#include "qfp/kernels.hpp"

using namespace qfp;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::serial : Execution::parallel;
}

// state.range(0) = d; B = 4d, P = d - 1, 100 particles.
void BM_EvaluateSwarm(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto space = SearchSpace::for_dimension(d, 4 * d);
  const int particles = 100;
  std::mt19937_64 rng(1);
  std::vector<double> positions(static_cast<std::size_t>(particles * space.size()));
  for (int p = 0; p < particles; ++p) {
    for (int j = 0; j < space.size(); ++j) {
      positions[static_cast<std::size_t>(p * space.size() + j)] =
          std::uniform_real_distribution<double>(space.lower(j), space.upper(j))(rng);
    }
  }
  CoefficientOptions options;
  options.samples = space.resolving_samples();
  std::vector<double> costs(particles);
  for (auto _ : state) {
    kernels::evaluate_swarm(positions, space, options, kSynthesisFidelityClamp, costs, mode(state));
    benchmark::DoNotOptimize(costs.data());
  }
  state.SetItemsProcessed(state.iterations() * particles);
}
BENCHMARK(BM_EvaluateSwarm)
    ->ArgNames({"d", "parallel"})
    ->ArgsProduct({{2, 3, 5}, {0, 1}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

// state.range(0) = number of posterior draws on simulated qutrit data.
void BM_EntropicBoundDraws(benchmark::State& state) {
  JointDistribution logical, fourier;
  logical.probs = joint_distribution(prepare_phi_state(0.0), Matrix::Identity(3, 3), Matrix::Identity(3, 3)).probs;
  fourier.probs = joint_distribution(prepare_phi_state(0.0), dft_matrix(3), dft_matrix(3)).probs;
  const auto a = sample_counts(logical, Multinomial{1000}, 1).counts;
  const auto b = sample_counts(fourier, Multinomial{1000}, 2).counts;
  const int draws = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto out = entropic_bound_draws(a, b, draws, 7, mode(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * draws);
}
BENCHMARK(BM_EntropicBoundDraws)
    ->ArgNames({"draws", "parallel"})
    ->ArgsProduct({{4096, 16384}, {0, 1}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
