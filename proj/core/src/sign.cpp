#include "sign/sign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

#include "sign/errors.hpp"

namespace sign {

void SignConfig::validate() const {
  if (max_items_per_shard < 2) throw UsageError("max items per shard must be at least 2");
  if (workers < 1) throw UsageError("workers must be at least 1");
  mcmc.validate();
  for (const auto& m : step_mcmc) m.validate();
}

const McmcConfig& SignConfig::schedule_for(int step) const {
  const auto idx = static_cast<std::size_t>(step - 1);
  return idx < step_mcmc.size() ? step_mcmc[idx] : mcmc;
}

int shard_count(int num_items, int max_items_per_shard) {
  if (num_items < 1) return 0;
  int m = (num_items + max_items_per_shard - 1) / max_items_per_shard;
  m = std::min(m, std::max(1, num_items / 2));
  return std::max(m, 1);
}

std::vector<std::vector<int>> shard_split(int num_items, int num_shards, Rng& rng) {
  if (num_shards < 1) throw UsageError("need at least one shard");
  if (num_items < 0) throw UsageError("item count must be non-negative");
  std::vector<int> perm(static_cast<std::size_t>(num_items));
  for (int i = 0; i < num_items; ++i) perm[static_cast<std::size_t>(i)] = i;
  if (num_shards == 1) return {perm};
  // Fisher-Yates with the stream's own index draws.
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);

  std::vector<std::vector<int>> groups;
  const int base = num_items / num_shards;
  const int extra = num_items % num_shards;
  std::size_t pos = 0;
  for (int m = 0; m < num_shards; ++m) {
    const int len = base + (m < extra ? 1 : 0);
    if (len == 0) continue;
    groups.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                        perm.begin() + static_cast<std::ptrdiff_t>(pos) + len);
    pos += static_cast<std::size_t>(len);
  }
  return groups;
}

std::uint64_t shard_seed(std::uint64_t master_seed, int step, int shard) {
  return mix_seed(master_seed, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(shard) + 1);
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<int> labels_from_items(const std::vector<BlockItem>& items, std::size_t n) {
  std::vector<int> labels(n, -1);
  for (std::size_t k = 0; k < items.size(); ++k) {
    for (int obs : items[k].obs_ids) labels[static_cast<std::size_t>(obs)] = static_cast<int>(k);
  }
  return labels;
}

// Runs fn(0..count-1) on up to `workers` threads and rethrows the first failure.
template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (int m = 0; m < count; ++m) fn(m);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  const int threads = std::min(workers, count);
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int m = next.fetch_add(1); m < count; m = next.fetch_add(1)) {
        try {
          fn(m);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

SignReport run_sign(const Dataset& data, const Hyperparams& hyper, const SignConfig& config) {
  if (data.empty()) throw UsageError("cannot run on an empty dataset");
  config.validate();
  hyper.validate(data.schema());

  SignReport report;
  std::vector<BlockItem> items = singleton_items(data.size());
  int step = 1;

  while (static_cast<int>(items.size()) > config.max_items_per_shard) {
    const auto start = Clock::now();
    const int b = static_cast<int>(items.size());
    const int m = shard_count(b, config.max_items_per_shard);
    Rng split_rng(mix_seed(config.master_seed, static_cast<std::uint64_t>(step), 0));
    const auto groups = shard_split(b, m, split_rng);

    std::vector<std::vector<BlockItem>> outputs(groups.size());
    McmcConfig schedule = config.schedule_for(step);
    parallel_for(static_cast<int>(groups.size()), config.workers, [&](int g) {
      std::vector<BlockItem> shard_items;
      shard_items.reserve(groups[static_cast<std::size_t>(g)].size());
      for (int idx : groups[static_cast<std::size_t>(g)]) shard_items.push_back(items[static_cast<std::size_t>(idx)]);
      McmcConfig cfg = schedule;
      cfg.seed = shard_seed(config.master_seed, step, g);
      try {
        outputs[static_cast<std::size_t>(g)] = mcmc_shard(data, std::move(shard_items), hyper, cfg, false).merged_items;
      } catch (const std::exception& e) {
        throw StateError("step " + std::to_string(step) + " shard " + std::to_string(g) + " failed: " + e.what());
      }
    });

    std::vector<BlockItem> next;
    for (auto& out : outputs) {
      for (auto& item : out) next.push_back(std::move(item));
    }
    StepRecord rec;
    rec.step = step;
    rec.shards = static_cast<int>(groups.size());
    rec.items_in = b;
    rec.items_out = static_cast<int>(next.size());
    rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.steps.push_back(rec);
    report.step_labels.push_back(labels_from_items(next, data.size()));
    if (config.progress) {
      std::cerr << "[sign] step " << step << ": B=" << b << " M=" << rec.shards << " -> " << rec.items_out
                << " items (" << rec.seconds << " s)\n";
    }
    const bool stalled = rec.items_out == b;
    items = std::move(next);
    ++step;
    if (stalled) {
      if (config.progress) std::cerr << "[sign] no clusters merged at this step; moving to the final step\n";
      break;
    }
  }

  // Final single-shard step over every remaining item.
  const auto start = Clock::now();
  const int b = static_cast<int>(items.size());
  McmcConfig cfg = config.schedule_for(step);
  cfg.seed = shard_seed(config.master_seed, step, 0);
  ShardOutput out = mcmc_shard(data, items, hyper, cfg, true);

  StepRecord rec;
  rec.step = step;
  rec.shards = 1;
  rec.items_in = b;
  rec.items_out = static_cast<int>(out.merged_items.size());
  rec.final = true;
  rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  report.steps.push_back(rec);
  report.step_labels.push_back(labels_from_items(out.merged_items, data.size()));
  if (config.progress) {
    std::cerr << "[sign] step " << step << " (final): B=" << b << " M=1 -> " << rec.items_out << " clusters ("
              << rec.seconds << " s)\n";
  }

  report.final_partition = Partition::from_labels(report.step_labels.back());
  report.final_trace.schema = data.schema();
  report.final_trace.hyper = hyper;
  report.final_trace.num_observations = static_cast<long>(data.size());
  report.final_trace.draws = std::move(out.draws);
  return report;
}

}  // namespace sign
