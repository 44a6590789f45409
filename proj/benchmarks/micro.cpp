#include <benchmark/benchmark.h>

#include <vector>

#include "sign/partition.hpp"
#include "sign/predict.hpp"
#include "sign/probit.hpp"
#include "sign/shard_mcmc.hpp"
#include "sign/sign.hpp"
#include "sign/similarity.hpp"
#include "sign/synth.hpp"

namespace {

using namespace sign;

// One Gibbs iteration on a warmed-up Sim I shard of state.range(0) items.
void BM_ShardIteration(benchmark::State& state) {
  const auto sim = gen_sim1(static_cast<int>(state.range(0)), 1);
  ShardSampler sampler(sim.data, singleton_items(sim.data.size()), Hyperparams::defaults(sim.data.schema()), 2);
  for (int i = 0; i < 200; ++i) sampler.iterate();
  for (auto _ : state) sampler.iterate();
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["clusters"] = static_cast<double>(sampler.state().clusters.size());
}
BENCHMARK(BM_ShardIteration)->Arg(100)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_LogMarginalG(benchmark::State& state) {
  const auto sim = gen_sim1(100, 3);
  const auto h = Hyperparams::defaults(sim.data.schema()).similarity;
  CovariateStats stats = CovariateStats::empty(sim.data.schema());
  for (std::size_t i = 0; i < 50; ++i) stats.add(sim.data.row(i));
  for (auto _ : state) benchmark::DoNotOptimize(log_marginal_g(stats, h));
}
BENCHMARK(BM_LogMarginalG);

void BM_LogPredictiveRatio(benchmark::State& state) {
  const auto sim = gen_sim1(100, 4);
  const auto h = Hyperparams::defaults(sim.data.schema()).similarity;
  CovariateStats stats = CovariateStats::empty(sim.data.schema());
  for (std::size_t i = 0; i < 50; ++i) stats.add(sim.data.row(i));
  const auto row = sim.data.row(60);
  for (auto _ : state) benchmark::DoNotOptimize(log_predictive_ratio(row, stats, h));
}
BENCHMARK(BM_LogPredictiveRatio);

void BM_BlockWeights(benchmark::State& state) {
  std::vector<int> sizes(static_cast<std::size_t>(state.range(0)));
  for (std::size_t c = 0; c < sizes.size(); ++c) sizes[c] = 1 + static_cast<int>(c % 17) * 7;
  const PYParams py{1.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(block_membership_log_weights(12, sizes, py));
}
BENCHMARK(BM_BlockWeights)->Arg(5)->Arg(50);

void BM_SampleLatent(benchmark::State& state) {
  Rng rng(5);
  double eta = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_latent(1, eta, rng));
    eta = eta > 3.0 ? -3.0 : eta + 0.01;
  }
}
BENCHMARK(BM_SampleLatent);

// Predicting 200 rows from the trace of a short fit.
void BM_Predict(benchmark::State& state) {
  const auto train = gen_sim1(400, 6);
  const auto test = gen_sim1(200, 7);
  SignConfig cfg;
  cfg.max_items_per_shard = 400;
  cfg.mcmc.n_iter = 500;
  cfg.progress = false;
  const auto rep = run_sign(train.data, Hyperparams::defaults(train.data.schema()), cfg);
  const Predictor predictor(rep.final_trace, 8);
  for (auto _ : state) benchmark::DoNotOptimize(predictor.predict(test.data));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(test.data.size()));
  state.counters["draws"] = static_cast<double>(rep.final_trace.draws.size());
}
BENCHMARK(BM_Predict)->Unit(benchmark::kMillisecond);

}  // namespace
