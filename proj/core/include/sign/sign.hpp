#pragma once

#include <cstdint>
#include <vector>

#include "sign/dataset.hpp"
#include "sign/partition.hpp"
#include "sign/predict.hpp"
#include "sign/random.hpp"
#include "sign/shard_mcmc.hpp"

namespace sign {

struct SignConfig {
  int max_items_per_shard = 250;  // R
  McmcConfig mcmc;                // seed is ignored; shard seeds derive from master_seed
  /// Optional per-step schedules; entry k replaces `mcmc` at step k + 1.
  std::vector<McmcConfig> step_mcmc;
  int workers = 1;
  std::uint64_t master_seed = 0;
  bool progress = true;  // one line per step on stderr

  void validate() const;
  const McmcConfig& schedule_for(int step) const;
};

struct StepRecord {
  int step = 0;  // 1-based
  int shards = 0;
  int items_in = 0;
  int items_out = 0;
  bool final = false;
  double seconds = 0.0;
};

struct SignReport {
  std::vector<StepRecord> steps;
  /// Item label of every observation after each step; freezing means each
  /// row refines into the next.
  std::vector<std::vector<int>> step_labels;
  Partition final_partition;  // over observations
  PosteriorTrace final_trace;

  int num_steps() const { return static_cast<int>(steps.size()); }
};

/// Number of shards for B items: ceil(B / R), reduced so that every shard
/// receives at least two items.
int shard_count(int num_items, int max_items_per_shard);

/// Random balanced split of item indices 0..B-1 into M groups whose sizes
/// differ by at most one. Empty groups (M > B) are dropped.
std::vector<std::vector<int>> shard_split(int num_items, int num_shards, Rng& rng);

/// Seed of shard `shard` (0-based) at step `step` (1-based).
std::uint64_t shard_seed(std::uint64_t master_seed, int step, int shard);

/// Multi-step sharded inference. Starts from singleton items; while there
/// are more than R items, shards them, runs mcmc_shard on every shard
/// (up to `workers` at a time) and freezes the estimated clusters into the
/// next step's items. A final single-shard run over the remaining items
/// produces the partition estimate and the posterior trace.
SignReport run_sign(const Dataset& data, const Hyperparams& hyper, const SignConfig& config);

}  // namespace sign
