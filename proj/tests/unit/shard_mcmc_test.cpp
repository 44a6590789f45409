#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "generators.hpp"
#include "sign/errors.hpp"
#include "sign/oracle.hpp"
#include "sign/shard_mcmc.hpp"
#include "sign/synth.hpp"

using namespace sign;

namespace {

Schema cont_schema(int p) {
  Schema s;
  for (int j = 0; j < p; ++j) s.continuous.push_back("w" + std::to_string(j));
  return s;
}

Dataset cont_data(const std::vector<double>& xs) {
  Dataset d(cont_schema(1));
  for (double x : xs) d.push_back(0, std::vector<double>{x}, std::vector<int>{});
  return d;
}

Hyperparams similarity_only(const Schema& s) {
  Hyperparams h = Hyperparams::defaults(s);
  h.terms.probit = false;
  return h;
}

// Probability of each partition of n items under sequential CRP seating.
std::map<std::vector<int>, double> crp_partition_probs(int n, double alpha) {
  std::map<std::vector<int>, double> out;
  for (const auto& labels : enumerate_partitions(n)) {
    double p = 1.0;
    std::vector<int> counts;
    for (int i = 0; i < n; ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (l == static_cast<int>(counts.size())) {
        p *= alpha / (i + alpha);
        counts.push_back(1);
      } else {
        p *= counts[static_cast<std::size_t>(l)] / (i + alpha);
        ++counts[static_cast<std::size_t>(l)];
      }
    }
    out[labels] = p;
  }
  return out;
}

}  // namespace

TEST_CASE("schedule arithmetic") {
  McmcConfig c;
  CHECK(c.saved_draws() == 1000);
  int saved = 0;
  int last = 0;
  for (int it = 1; it <= c.n_iter; ++it) {
    if (c.is_saved(it)) {
      ++saved;
      CHECK(it > c.n_iter / 2);
      CHECK(it % c.thin == 0);
      last = it;
    }
  }
  CHECK(saved == 1000);
  CHECK(last == c.n_iter);

  McmcConfig odd{103, 0.3, 7, 0};
  saved = 0;
  for (int it = 1; it <= odd.n_iter; ++it) saved += odd.is_saved(it);
  CHECK(saved == odd.saved_draws());
  CHECK(odd.saved_draws() == static_cast<int>(std::floor(103 * 0.7 / 7)));

  CHECK_THROWS_AS((McmcConfig{0, 0.5, 5, 0}.validate()), UsageError);
  CHECK_THROWS_AS((McmcConfig{10, 1.0, 5, 0}.validate()), UsageError);
  CHECK_THROWS_AS((McmcConfig{10, 0.5, 0, 0}.validate()), UsageError);
  CHECK_THROWS_AS((McmcConfig{4, 0.5, 5, 0}.validate()), UsageError);
}

TEST_CASE("least-squares partition estimate") {
  const std::vector<Partition> saved{Partition::from_labels(std::vector<int>{0, 0, 1}),
                                     Partition::from_labels(std::vector<int>{0, 0, 1}),
                                     Partition::from_labels(std::vector<int>{0, 1, 2})};
  CHECK(dahl_least_squares_index(saved) == 0);
  CHECK(dahl_least_squares(saved) == saved[0]);
  const auto pi = coclustering_matrix(saved);
  CHECK(pi(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(pi(0, 2) == 0.0);
  CHECK(pi(2, 2) == 1.0);

  const std::vector<Partition> one{Partition::from_labels(std::vector<int>{0, 1, 1, 0})};
  CHECK(dahl_least_squares(one) == one[0]);
  CHECK_THROWS_AS(dahl_least_squares(std::span<const Partition>{}), UsageError);

  // Ties go to the earliest sample: two partitions each with loss 1/4 + 1/4.
  const std::vector<Partition> tie{Partition::from_labels(std::vector<int>{0, 0}),
                                   Partition::from_labels(std::vector<int>{0, 1})};
  CHECK(dahl_least_squares_index(tie) == 0);

  // Brute-force loss comparison on random inputs.
  gen::Engine e(41);
  for (int t = 0; t < 50; ++t) {
    const int b = gen::integer(e, 1, 12);
    std::vector<Partition> ps;
    const int m = gen::integer(e, 1, 15);
    for (int k = 0; k < m; ++k) ps.push_back(Partition::from_labels(gen::labels(e, b, gen::integer(e, 1, 4))));
    std::vector<double> loss(ps.size(), 0.0);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      for (int i = 0; i < b; ++i) {
        for (int j = i + 1; j < b; ++j) {
          double freq = 0.0;
          for (const auto& q : ps) freq += q.labels[static_cast<std::size_t>(i)] == q.labels[static_cast<std::size_t>(j)];
          freq /= static_cast<double>(ps.size());
          const double delta = ps[k].labels[static_cast<std::size_t>(i)] == ps[k].labels[static_cast<std::size_t>(j)];
          loss[k] += (delta - freq) * (delta - freq);
        }
      }
    }
    const auto best = static_cast<std::size_t>(std::min_element(loss.begin(), loss.end()) - loss.begin());
    CHECK(loss[dahl_least_squares_index(ps)] == doctest::Approx(loss[best]).epsilon(1e-12));
  }
}

TEST_CASE("single item always forms one cluster") {
  const Dataset d = cont_data({0.3});
  ShardSampler s(d, singleton_items(1), Hyperparams::defaults(d.schema()), 1);
  for (int it = 0; it < 50; ++it) {
    s.iterate();
    CHECK(s.partition().num_clusters() == 1);
  }
}

TEST_CASE("sampler keeps state consistent") {
  gen::Engine e(42);
  for (int t = 0; t < 8; ++t) {
    const Schema sc = gen::schema(e, 2, 2);
    const Dataset d = gen::dataset(e, sc, 40);
    // Mixed item sizes.
    std::vector<BlockItem> items;
    for (int i = 0; i < 40;) {
      const int r = std::min(gen::integer(e, 1, 4), 40 - i);
      BlockItem item;
      for (int k = 0; k < r; ++k) item.obs_ids.push_back(i + k);
      items.push_back(item);
      i += r;
    }
    Hyperparams h = Hyperparams::defaults(sc);
    h.py.discount = gen::real(e, 0.0, 0.8);
    ShardSampler s(d, items, h, static_cast<std::uint64_t>(t));
    for (int it = 0; it < 30; ++it) {
      s.iterate();
      CHECK_NOTHROW(s.check_invariants());
      const Partition p = s.partition();
      CHECK_NOTHROW(p.validate(40));
      CHECK(p.num_clusters() == static_cast<int>(s.state().clusters.size()));
    }
  }
}

TEST_CASE("covariate-free schema updates only beta") {
  Schema s;
  Dataset d(s);
  for (int i = 0; i < 10; ++i) d.push_back(i % 2, std::vector<double>{}, std::vector<int>{});
  ShardSampler sampler(d, singleton_items(10), Hyperparams::defaults(s), 3);
  for (int it = 0; it < 20; ++it) sampler.iterate();
  for (const auto& c : sampler.state().clusters) {
    CHECK(c.theta.beta.size() == 1);
    CHECK(c.theta.xi.mu.empty());
    CHECK(c.theta.xi.pi.empty());
  }
}

TEST_CASE("cluster mean draws follow the conjugate posterior") {
  gen::Engine e(43);
  std::vector<double> xs(20);
  for (auto& x : xs) x = 1.5 + gen::real(e, -1, 1);
  const Dataset d = cont_data(xs);
  Hyperparams h = similarity_only(d.schema());
  ShardSampler s(d, singleton_items(20), h, 4);
  s.set_partition(std::vector<int>(20, 0));

  // Normal-gamma update written out by hand.
  const double n = 20;
  double mean = 0, ss = 0;
  for (double x : xs) mean += x / n;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const auto& sh = h.similarity;
  const double vn = sh.v0 + n;
  const double mun = (sh.v0 * sh.mu0 + n * mean) / vn;
  const double an = sh.a_lambda + n / 2;
  const double bn = sh.b_lambda + ss / 2 + n * sh.v0 * (mean - sh.mu0) * (mean - sh.mu0) / (2 * vn);
  const double var_mu = bn / (an * vn) * (2 * an) / (2 * an - 2);

  const int draws = 20000;
  double acc = 0;
  for (int k = 0; k < draws; ++k) {
    s.update_cluster_params();
    acc += s.state().clusters[0].theta.xi.mu[0];
  }
  CHECK(std::abs(acc / draws - mun) < 4 * std::sqrt(var_mu / draws));
}

TEST_CASE("prior-only chain reproduces CRP partition probabilities") {
  const int n = 4;
  const Dataset d = cont_data({0.0, 1.0, 2.0, 3.0});
  Hyperparams h = Hyperparams::defaults(d.schema());
  h.terms = {false, false};
  h.py = {1.3, 0.0};
  ShardSampler s(d, singleton_items(n), h, 5);
  std::map<std::vector<int>, double> freq;
  const int sweeps = 100000;
  for (int it = 0; it < sweeps; ++it) {
    s.iterate();
    freq[Partition::from_labels(s.partition().labels).labels] += 1.0 / sweeps;
  }
  for (const auto& [labels, p] : crp_partition_probs(n, 1.3)) CHECK(std::abs(freq[labels] - p) < 0.01);
}

TEST_CASE("two identical items co-cluster at the exact rate") {
  const Dataset d = cont_data({0.25, 0.25});
  const Hyperparams h = similarity_only(d.schema());
  const auto items = singleton_items(2);
  const double exact = brute_force_coclustering(d, items, h)(0, 1);
  ShardSampler s(d, items, h, 6);
  double together = 0;
  const int sweeps = 100000;
  for (int it = 0; it < sweeps; ++it) {
    s.iterate();
    together += s.partition().num_clusters() == 1;
  }
  CHECK(std::abs(together / sweeps - exact) < 0.02);
}

TEST_CASE("five-item chain matches enumeration in total variation") {
  const Dataset d = cont_data({-1.2, -0.9, 0.1, 1.4, 1.6});
  Hyperparams h = similarity_only(d.schema());
  h.similarity.v0 = 0.5;
  h.similarity.a_lambda = 2.0;
  h.similarity.b_lambda = 0.5;
  const auto items = singleton_items(5);

  const auto parts = enumerate_partitions(5);
  REQUIRE(parts.size() == 52);
  std::vector<double> exact;
  double total = 0;
  for (const auto& labels : parts) {
    const Partition p = Partition::from_labels(labels);
    double lw = py_log_eppf(p.sizes, h.py);
    for (int c = 0; c < p.num_clusters(); ++c) {
      CovariateStats st = CovariateStats::empty(d.schema());
      for (int i = 0; i < 5; ++i) {
        if (labels[static_cast<std::size_t>(i)] == c) st.add(d.row(static_cast<std::size_t>(i)));
      }
      lw += log_marginal_g(st, h.similarity);
    }
    exact.push_back(std::exp(lw));
    total += exact.back();
  }
  std::map<std::vector<int>, double> freq;
  ShardSampler s(d, items, h, 7);
  const int sweeps = 200000;
  for (int it = 0; it < sweeps; ++it) {
    s.iterate();
    freq[Partition::from_labels(s.partition().labels).labels] += 1.0 / sweeps;
  }
  double tv = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) tv += 0.5 * std::abs(freq[parts[k]] - exact[k] / total);
  CHECK(tv < 0.03);
}

TEST_CASE("shard output freezes and partitions its input") {
  const auto sim = gen_sim1(100, 8);
  // Start from pairs so freezing of multi-observation items is exercised.
  std::vector<BlockItem> items;
  for (int i = 0; i < 100; i += 2) items.push_back(BlockItem{{i, i + 1}});
  const McmcConfig cfg{300, 0.5, 5, 9};
  const auto out = mcmc_shard(sim.data, items, Hyperparams::defaults(sim.data.schema()), cfg, true);
  CHECK(out.saved_partitions.size() == 30);
  CHECK(out.draws.size() == 30);
  std::set<int> seen;
  for (const auto& m : out.merged_items) {
    CHECK(std::is_sorted(m.obs_ids.begin(), m.obs_ids.end()));
    for (int id : m.obs_ids) CHECK(seen.insert(id).second);
    // Every input pair lies entirely inside one output item.
    for (int id : m.obs_ids) {
      const int mate = id % 2 ? id - 1 : id + 1;
      CHECK(std::binary_search(m.obs_ids.begin(), m.obs_ids.end(), mate));
    }
  }
  CHECK(seen.size() == 100);
  CHECK(static_cast<int>(out.merged_items.size()) == out.estimate.num_clusters());
  for (const auto& draw : out.draws) {
    long total = 0;
    for (const auto& c : draw.clusters) total += c.size;
    CHECK(total == 100);
  }

  const auto again = mcmc_shard(sim.data, items, Hyperparams::defaults(sim.data.schema()), cfg, true);
  CHECK(again.merged_items == out.merged_items);
  CHECK(again.saved_partitions == out.saved_partitions);
  for (std::size_t t = 0; t < out.draws.size(); ++t) {
    for (std::size_t c = 0; c < out.draws[t].clusters.size(); ++c) {
      CHECK(out.draws[t].clusters[c].beta == again.draws[t].clusters[c].beta);
    }
  }
}

TEST_CASE("simulation shard of 200 finds a moderate number of clusters") {
  int ok = 0;
  const int runs = 10;
  for (int r = 0; r < runs; ++r) {
    const auto sim = gen_sim1(200, 100 + static_cast<std::uint64_t>(r));
    const McmcConfig cfg{2000, 0.5, 5, static_cast<std::uint64_t>(r)};
    const auto out = mcmc_shard(sim.data, singleton_items(200), Hyperparams::defaults(sim.data.schema()), cfg, false);
    const int c = out.estimate.num_clusters();
    ok += c >= 3 && c <= 7;
  }
  CHECK(ok >= 9);
}
