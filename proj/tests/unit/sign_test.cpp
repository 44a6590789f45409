#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "sign/errors.hpp"
#include "sign/sign.hpp"
#include "sign/synth.hpp"

using namespace sign;

namespace {

std::vector<int> sorted_sizes(const std::vector<std::vector<int>>& groups) {
  std::vector<int> s;
  for (const auto& g : groups) s.push_back(static_cast<int>(g.size()));
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

SignConfig quick(int r, std::uint64_t seed, int workers = 1) {
  SignConfig c;
  c.max_items_per_shard = r;
  c.mcmc = McmcConfig{200, 0.5, 5, 0};
  c.master_seed = seed;
  c.workers = workers;
  c.progress = false;
  return c;
}

}  // namespace

TEST_CASE("shard counts") {
  CHECK(shard_count(800, 250) == 4);
  CHECK(shard_count(84750, 340) == 250);
  CHECK(shard_count(50000, 340) == 148);
  CHECK(shard_count(250, 250) == 1);
  CHECK(shard_count(251, 250) == 2);
  CHECK(shard_count(3, 2) == 1);  // two shards would leave one with a single item
  CHECK(shard_count(5, 2) == 2);
}

TEST_CASE("balanced random split") {
  Rng rng(51);
  CHECK(sorted_sizes(shard_split(10, 2, rng)) == std::vector<int>{5, 5});
  CHECK(sorted_sizes(shard_split(7, 3, rng)) == std::vector<int>{3, 2, 2});
  const auto one = shard_split(6, 1, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK(shard_split(3, 5, rng).size() == 3);
  CHECK_THROWS_AS(shard_split(3, 0, rng), UsageError);

  const auto ehr = shard_split(84750, 250, rng);
  CHECK(ehr.size() == 250);
  for (const auto& g : ehr) CHECK(g.size() == 339);

  for (int t = 0; t < 100; ++t) {
    const int b = 1 + static_cast<int>(rng.uniform_index(300));
    const int m = 1 + static_cast<int>(rng.uniform_index(40));
    const auto groups = shard_split(b, m, rng);
    std::set<int> seen;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& g : groups) {
      lo = std::min(lo, g.size());
      hi = std::max(hi, g.size());
      for (int i : g) CHECK(seen.insert(i).second);
    }
    CHECK(static_cast<int>(seen.size()) == b);
    CHECK(hi - lo <= 1);
  }

  Rng a(52), b(52);
  CHECK(shard_split(100, 7, a) == shard_split(100, 7, b));
}

TEST_CASE("shard seeds are distinct and stable") {
  std::set<std::uint64_t> seeds;
  for (int step = 1; step <= 4; ++step) {
    for (int shard = 0; shard < 300; ++shard) CHECK(seeds.insert(shard_seed(9, step, shard)).second);
  }
  CHECK(shard_seed(9, 2, 5) == shard_seed(9, 2, 5));
  CHECK(shard_seed(9, 2, 5) != shard_seed(10, 2, 5));
}

TEST_CASE("small data runs as a single full chain") {
  const auto sim = gen_sim1(60, 53);
  const Hyperparams h = Hyperparams::defaults(sim.data.schema());
  const SignConfig cfg = quick(100, 54);
  const auto report = run_sign(sim.data, h, cfg);
  REQUIRE(report.num_steps() == 1);
  CHECK(report.steps[0].final);
  CHECK(report.steps[0].shards == 1);

  McmcConfig direct = cfg.mcmc;
  direct.seed = shard_seed(cfg.master_seed, 1, 0);
  const auto out = mcmc_shard(sim.data, singleton_items(60), h, direct, true);
  CHECK(report.final_partition == Partition::from_labels(out.estimate.labels));
  CHECK(report.final_trace.draws.size() == out.draws.size());
}

TEST_CASE("multi-step run coarsens monotonically and is reproducible") {
  const auto sim = gen_sim1(150, 55);
  const Hyperparams h = Hyperparams::defaults(sim.data.schema());
  const auto report = run_sign(sim.data, h, quick(40, 56));
  REQUIRE(report.num_steps() >= 2);
  CHECK(report.steps[0].items_in == 150);
  CHECK(report.steps[0].shards == 4);
  CHECK(report.steps.back().final);
  CHECK(report.steps.back().items_in <= 40);
  for (std::size_t k = 1; k < report.steps.size(); ++k) {
    CHECK(report.steps[k].items_in == report.steps[k - 1].items_out);
    CHECK(report.steps[k].items_out <= report.steps[k].items_in);
  }
  // Each step's items are unions of the previous step's items.
  for (std::size_t k = 1; k < report.step_labels.size(); ++k) {
    std::map<int, int> coarse_of_fine;
    for (std::size_t i = 0; i < 150; ++i) {
      const auto [it, fresh] = coarse_of_fine.emplace(report.step_labels[k - 1][i], report.step_labels[k][i]);
      CHECK((fresh || it->second == report.step_labels[k][i]));
    }
  }
  CHECK_NOTHROW(report.final_partition.validate(150));
  CHECK_NOTHROW(report.final_trace.validate());

  const auto again = run_sign(sim.data, h, quick(40, 56, 3));
  CHECK(again.step_labels == report.step_labels);
  CHECK(again.final_partition == report.final_partition);
  REQUIRE(again.final_trace.draws.size() == report.final_trace.draws.size());
  for (std::size_t t = 0; t < again.final_trace.draws.size(); ++t) {
    const auto& x = again.final_trace.draws[t].clusters;
    const auto& y = report.final_trace.draws[t].clusters;
    REQUIRE(x.size() == y.size());
    for (std::size_t c = 0; c < x.size(); ++c) {
      CHECK(x[c].beta == y[c].beta);
      CHECK(x[c].size == y[c].size);
      CHECK(x[c].stats == y[c].stats);
    }
  }
}

TEST_CASE("per-step schedules and validation") {
  const auto sim = gen_sim1(100, 57);
  const Hyperparams h = Hyperparams::defaults(sim.data.schema());
  SignConfig cfg = quick(60, 58);
  cfg.step_mcmc = {McmcConfig{100, 0.5, 5, 0}, McmcConfig{150, 0.2, 3, 0}};
  CHECK(cfg.schedule_for(2).thin == 3);
  CHECK(cfg.schedule_for(3).n_iter == 200);
  const auto report = run_sign(sim.data, h, cfg);
  REQUIRE(report.num_steps() >= 2);
  CHECK(static_cast<int>(report.final_trace.draws.size()) == cfg.schedule_for(report.num_steps()).saved_draws());

  SignConfig bad = quick(1, 0);
  CHECK_THROWS_AS(run_sign(sim.data, h, bad), UsageError);
  bad = quick(50, 0, 0);
  CHECK_THROWS_AS(run_sign(sim.data, h, bad), UsageError);
  CHECK_THROWS_AS(run_sign(Dataset(sim.data.schema()), h, quick(50, 0)), UsageError);
}
