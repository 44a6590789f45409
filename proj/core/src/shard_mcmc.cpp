#include "sign/shard_mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <string>

#include "sign/errors.hpp"

namespace sign {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Per-item quantities that never change once the item is frozen.
struct ItemCache {
  int size = 0;
  CovariateStats stats;
  std::vector<double> cont_mean;
  std::vector<double> cont_css;
  std::vector<std::pair<int, double>> cat_terms;  // (flat level index, count)
  RowMatrix design;
  std::vector<std::uint8_t> outcomes;
  Eigen::MatrixXd gram;
};

// Log-density helpers derived from a cluster's parameters.
struct ParamEval {
  std::vector<double> mu;
  std::vector<double> lambda;
  std::vector<double> half_log_norm;  // 0.5 (log lambda - log 2 pi)
  std::vector<double> log_pi;         // flattened over categorical columns
};

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::vector<BlockItem> singleton_items(std::size_t n) {
  std::vector<BlockItem> items(n);
  for (std::size_t i = 0; i < n; ++i) items[i].obs_ids = {static_cast<int>(i)};
  return items;
}

Hyperparams Hyperparams::defaults(const Schema& schema) {
  Hyperparams h;
  const auto levels = schema.levels();
  h.similarity.a_pi = SimilarityHyper::default_a_pi(levels);
  return h;
}

void Hyperparams::validate(const Schema& schema) const {
  py.validate();
  if (!(tau_beta > 0.0)) throw DomainError("tau_beta must be positive");
  similarity.validate(schema.categorical.size());
}

void McmcConfig::validate() const {
  if (n_iter <= 0) throw UsageError("n_iter must be positive");
  if (!(burn_frac >= 0.0 && burn_frac < 1.0)) throw UsageError("burn_frac must lie in [0, 1)");
  if (thin < 1) throw UsageError("thin must be at least 1");
  if (saved_draws() < 1) throw UsageError("MCMC schedule keeps no draws; raise n_iter or lower thin");
}

int McmcConfig::saved_draws() const {
  return static_cast<int>(std::floor(static_cast<double>(n_iter) * (1.0 - burn_frac) / thin));
}

bool McmcConfig::is_saved(int iteration) const {
  const int first = n_iter - (saved_draws() - 1) * thin;
  return iteration >= first && (n_iter - iteration) % thin == 0;
}

struct ShardSampler::Impl {
  const Dataset* data;
  Hyperparams hyper;
  Rng rng;
  std::vector<BlockItem> items;
  std::vector<ItemCache> cache;
  ShardState state;
  std::vector<ParamEval> evals;
  std::vector<int> levels;
  std::vector<int> level_offsets;
  int dim = 0;
  long total_obs = 0;

  std::vector<int> sizes_buf;
  std::vector<double> logw_buf;
  Eigen::VectorXd eta_buf;

  Impl(const Dataset& d, std::vector<BlockItem> its, const Hyperparams& h, std::uint64_t seed)
      : data(&d), hyper(h), rng(seed), items(std::move(its)) {
    const Schema& schema = data->schema();
    hyper.validate(schema);
    if (items.empty()) throw UsageError("a shard needs at least one item");
    levels = schema.levels();
    level_offsets.resize(levels.size());
    int offset = 0;
    for (std::size_t j = 0; j < levels.size(); ++j) {
      level_offsets[j] = offset;
      offset += levels[j];
    }
    dim = schema.design_dim();
    build_cache();
    init_singletons();
  }

  void build_cache() {
    const Schema& schema = data->schema();
    const int p = schema.num_continuous();
    cache.resize(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto& item = items[i];
      if (item.obs_ids.empty()) throw UsageError("block items must be non-empty");
      std::sort(item.obs_ids.begin(), item.obs_ids.end());
      ItemCache& c = cache[i];
      c.size = item.size();
      total_obs += c.size;
      c.stats = CovariateStats::empty(p, levels);
      c.design.resize(c.size, dim);
      c.outcomes.resize(static_cast<std::size_t>(c.size));
      for (int k = 0; k < c.size; ++k) {
        const auto obs = static_cast<std::size_t>(item.obs_ids[static_cast<std::size_t>(k)]);
        if (obs >= data->size()) throw UsageError("observation id out of range");
        const CovariateRow row = data->row(obs);
        c.stats.add(row);
        encode_design_into(row, levels, std::span<double>(c.design.row(k).data(), static_cast<std::size_t>(dim)));
        c.outcomes[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(data->outcome(obs));
      }
      for (const auto& s : c.stats.cont) {
        c.cont_mean.push_back(s.mean());
        c.cont_css.push_back(s.centered_sum_sq());
      }
      for (std::size_t j = 0; j < c.stats.cat.size(); ++j) {
        const auto& counts = c.stats.cat[j].counts;
        for (std::size_t l = 0; l < counts.size(); ++l) {
          if (counts[l] > 0) {
            c.cat_terms.emplace_back(level_offsets[j] + static_cast<int>(l), static_cast<double>(counts[l]));
          }
        }
      }
      if (hyper.terms.probit) c.gram = c.design.transpose() * c.design;
    }
  }

  ClusterParams draw_prior_params() {
    ClusterParams theta;
    if (hyper.terms.probit) theta.beta = sample_beta_prior(dim, hyper.tau_beta, rng);
    if (hyper.terms.covariates) {
      theta.xi = sample_xi_posterior(CovariateStats::empty(static_cast<int>(data->schema().continuous.size()), levels),
                                     hyper.similarity, rng);
    }
    return theta;
  }

  ParamEval make_eval(const ClusterParams& theta) const {
    ParamEval e;
    if (!hyper.terms.covariates) return e;
    e.mu = theta.xi.mu;
    e.lambda = theta.xi.lambda;
    e.half_log_norm.reserve(e.lambda.size());
    for (double l : e.lambda) e.half_log_norm.push_back(0.5 * (std::log(l) - kLogTwoPi));
    for (const auto& pi : theta.xi.pi) {
      for (double v : pi) e.log_pi.push_back(std::log(v));
    }
    return e;
  }

  double item_loglik(std::size_t i, const ClusterParams& theta, const ParamEval& e) {
    const ItemCache& c = cache[i];
    double acc = 0.0;
    if (hyper.terms.covariates) {
      const double r = static_cast<double>(c.size);
      for (std::size_t j = 0; j < e.mu.size(); ++j) {
        const double dev = c.cont_mean[j] - e.mu[j];
        acc += r * e.half_log_norm[j] - 0.5 * e.lambda[j] * (c.cont_css[j] + r * dev * dev);
      }
      for (const auto& [idx, count] : c.cat_terms) acc += count * e.log_pi[static_cast<std::size_t>(idx)];
    }
    if (hyper.terms.probit) {
      if (c.size == 1) {
        acc += probit_loglik(c.outcomes[0], c.design.row(0).dot(theta.beta));
      } else {
        eta_buf.noalias() = c.design * theta.beta;
        for (int k = 0; k < c.size; ++k) acc += probit_loglik(c.outcomes[static_cast<std::size_t>(k)], eta_buf[k]);
      }
    }
    return acc;
  }

  void init_singletons() {
    state.labels.resize(items.size());
    state.clusters.clear();
    evals.clear();
    for (std::size_t i = 0; i < items.size(); ++i) {
      state.labels[i] = static_cast<int>(i);
      ClusterState cs;
      cs.theta = draw_prior_params();
      cs.size = cache[i].size;
      cs.stats = cache[i].stats;
      evals.push_back(make_eval(cs.theta));
      state.clusters.push_back(std::move(cs));
    }
  }

  std::vector<std::vector<int>> members() const {
    std::vector<std::vector<int>> out(state.clusters.size());
    for (std::size_t i = 0; i < items.size(); ++i) out[static_cast<std::size_t>(state.labels[i])].push_back(static_cast<int>(i));
    return out;
  }

  void recompute_stats() {
    const int p = data->schema().num_continuous();
    for (auto& cl : state.clusters) cl.stats = CovariateStats::empty(p, levels);
    for (std::size_t i = 0; i < items.size(); ++i) {
      state.clusters[static_cast<std::size_t>(state.labels[i])].stats.merge(cache[i].stats);
    }
  }

  void update_cluster_params() {
    recompute_stats();
    const auto groups = members();
    for (std::size_t c = 0; c < state.clusters.size(); ++c) {
      ClusterState& cl = state.clusters[c];
      if (hyper.terms.covariates) cl.theta.xi = sample_xi_posterior(cl.stats, hyper.similarity, rng);
      if (hyper.terms.probit) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd xtl = Eigen::VectorXd::Zero(dim);
        for (int i : groups[c]) {
          const ItemCache& ic = cache[static_cast<std::size_t>(i)];
          gram += ic.gram;
          for (int k = 0; k < ic.size; ++k) {
            const double eta = ic.design.row(k).dot(cl.theta.beta);
            const double latent = sample_latent(ic.outcomes[static_cast<std::size_t>(k)], eta, rng);
            xtl.noalias() += latent * ic.design.row(k).transpose();
          }
        }
        cl.theta.beta = sample_beta_given_cluster(gram, xtl, hyper.tau_beta, rng);
      }
      evals[c] = make_eval(cl.theta);
    }
  }

  void remove_cluster(std::size_t c) {
    const std::size_t last = state.clusters.size() - 1;
    if (c != last) {
      state.clusters[c] = std::move(state.clusters[last]);
      evals[c] = std::move(evals[last]);
      for (int& label : state.labels) {
        if (label == static_cast<int>(last)) label = static_cast<int>(c);
      }
    }
    state.clusters.pop_back();
    evals.pop_back();
  }

  void sweep_memberships() {
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto old = static_cast<std::size_t>(state.labels[i]);
      const int r = cache[i].size;
      state.labels[i] = -1;
      state.clusters[old].size -= r;

      ClusterParams candidate;
      ParamEval candidate_eval;
      if (state.clusters[old].size == 0) {
        // The emptied cluster's parameters become the auxiliary candidate.
        candidate = std::move(state.clusters[old].theta);
        candidate_eval = std::move(evals[old]);
        remove_cluster(old);
      } else {
        candidate = draw_prior_params();
        candidate_eval = make_eval(candidate);
      }

      const std::size_t num = state.clusters.size();
      sizes_buf.resize(num);
      for (std::size_t c = 0; c < num; ++c) sizes_buf[c] = state.clusters[c].size;
      logw_buf.resize(num + 1);
      block_membership_log_weights(r, sizes_buf, hyper.py, logw_buf);
      for (std::size_t c = 0; c < num; ++c) logw_buf[c] += item_loglik(i, state.clusters[c].theta, evals[c]);
      logw_buf[num] += item_loglik(i, candidate, candidate_eval);

      const std::size_t pick = sample_from_log_weights(logw_buf, rng.uniform());
      if (pick == num) {
        ClusterState cs;
        cs.theta = std::move(candidate);
        cs.stats = CovariateStats::empty(data->schema().num_continuous(), levels);
        cs.size = r;
        state.clusters.push_back(std::move(cs));
        evals.push_back(std::move(candidate_eval));
      } else {
        state.clusters[pick].size += r;
      }
      state.labels[i] = static_cast<int>(pick);
    }
  }

  void set_partition(std::span<const int> raw) {
    if (raw.size() != items.size()) throw UsageError("partition length does not match the item count");
    std::vector<int> sizes(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) sizes[i] = cache[i].size;
    const Partition part = Partition::from_labels(raw, sizes);
    state.labels = part.labels;
    state.clusters.assign(part.sizes.size(), ClusterState{});
    evals.assign(part.sizes.size(), ParamEval{});
    for (std::size_t c = 0; c < part.sizes.size(); ++c) {
      state.clusters[c].size = part.sizes[c];
      state.clusters[c].theta = draw_prior_params();
    }
    update_cluster_params();
  }

  Partition partition() const {
    Partition out;
    out.labels = state.labels;
    out.sizes.reserve(state.clusters.size());
    for (const auto& cl : state.clusters) out.sizes.push_back(cl.size);
    return out;
  }

  TraceDraw snapshot() const {
    const int p = data->schema().num_continuous();
    TraceDraw draw;
    draw.clusters.resize(state.clusters.size());
    for (std::size_t c = 0; c < state.clusters.size(); ++c) {
      draw.clusters[c].size = state.clusters[c].size;
      draw.clusters[c].beta = state.clusters[c].theta.beta;
      draw.clusters[c].stats = CovariateStats::empty(p, levels);
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      draw.clusters[static_cast<std::size_t>(state.labels[i])].stats.merge(cache[i].stats);
    }
    return draw;
  }

  void check_invariants() const {
    const std::size_t num = state.clusters.size();
    std::vector<long> sizes(num, 0);
    const int p = data->schema().num_continuous();
    std::vector<CovariateStats> from_rows(num, CovariateStats::empty(p, levels));
    std::vector<CovariateStats> from_items(num, CovariateStats::empty(p, levels));
    for (std::size_t i = 0; i < items.size(); ++i) {
      const int label = state.labels[i];
      if (label < 0 || static_cast<std::size_t>(label) >= num) throw StateError("item label out of range");
      const auto c = static_cast<std::size_t>(label);
      sizes[c] += cache[i].size;
      from_items[c].merge(cache[i].stats);
      for (int obs : items[i].obs_ids) from_rows[c].add(data->row(static_cast<std::size_t>(obs)));
    }
    long total = 0;
    for (std::size_t c = 0; c < num; ++c) {
      if (sizes[c] == 0) throw StateError("empty cluster in shard state");
      if (sizes[c] != state.clusters[c].size) throw StateError("cluster size disagrees with its members");
      total += sizes[c];
      for (std::size_t j = 0; j < from_rows[c].cont.size(); ++j) {
        const auto& a = from_rows[c].cont[j];
        const auto& b = from_items[c].cont[j];
        if (a.count != b.count || !close_rel(a.sum, b.sum, 1e-6) || !close_rel(a.sum_sq, b.sum_sq, 1e-6)) {
          throw StateError("continuous stats disagree with a recomputation");
        }
      }
      for (std::size_t j = 0; j < from_rows[c].cat.size(); ++j) {
        if (from_rows[c].cat[j] != from_items[c].cat[j]) throw StateError("categorical stats disagree with a recomputation");
      }
    }
    if (total != total_obs) throw StateError("cluster sizes do not sum to the shard's observation count");
  }
};

ShardSampler::ShardSampler(const Dataset& data, std::vector<BlockItem> items, const Hyperparams& hyper,
                           std::uint64_t seed)
    : impl_(std::make_unique<Impl>(data, std::move(items), hyper, seed)) {}

ShardSampler::~ShardSampler() = default;
ShardSampler::ShardSampler(ShardSampler&&) noexcept = default;
ShardSampler& ShardSampler::operator=(ShardSampler&&) noexcept = default;

void ShardSampler::update_cluster_params() { impl_->update_cluster_params(); }
void ShardSampler::sweep_memberships() { impl_->sweep_memberships(); }
void ShardSampler::set_partition(std::span<const int> labels) { impl_->set_partition(labels); }
const std::vector<BlockItem>& ShardSampler::items() const { return impl_->items; }
const ShardState& ShardSampler::state() const { return impl_->state; }
Partition ShardSampler::partition() const { return impl_->partition(); }
TraceDraw ShardSampler::snapshot() const { return impl_->snapshot(); }
long ShardSampler::total_observations() const { return impl_->total_obs; }
void ShardSampler::check_invariants() const { impl_->check_invariants(); }

Eigen::MatrixXd coclustering_matrix(std::span<const Partition> saved) {
  if (saved.empty()) throw UsageError("co-clustering needs at least one saved partition");
  const auto b = static_cast<Eigen::Index>(saved.front().num_items());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(b, b);
  for (const auto& part : saved) {
    if (static_cast<Eigen::Index>(part.num_items()) != b) throw UsageError("saved partitions differ in item count");
    for (Eigen::Index i = 0; i < b; ++i) {
      const int li = part.labels[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i; j < b; ++j) {
        if (part.labels[static_cast<std::size_t>(j)] == li) counts(i, j) += 1.0;
      }
    }
  }
  counts /= static_cast<double>(saved.size());
  counts.triangularView<Eigen::StrictlyLower>() = counts.transpose();
  return counts;
}

std::size_t dahl_least_squares_index(std::span<const Partition> saved) {
  if (saved.empty()) throw UsageError("least-squares estimate needs at least one saved partition");
  const Eigen::MatrixXd pi = coclustering_matrix(saved);
  const auto b = pi.rows();
  std::size_t best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < saved.size(); ++t) {
    const auto& labels = saved[t].labels;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
      const int li = labels[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < b; ++j) {
        const double delta = labels[static_cast<std::size_t>(j)] == li ? 1.0 : 0.0;
        const double diff = delta - pi(i, j);
        loss += diff * diff;
      }
    }
    if (loss < best_loss) {
      best_loss = loss;
      best = t;
    }
  }
  return best;
}

Partition dahl_least_squares(std::span<const Partition> saved) { return saved[dahl_least_squares_index(saved)]; }

ShardOutput mcmc_shard(const Dataset& data, std::vector<BlockItem> items, const Hyperparams& hyper,
                       const McmcConfig& config, bool record_params) {
  config.validate();
  ShardSampler sampler(data, std::move(items), hyper, config.seed);
  ShardOutput out;
  out.saved_partitions.reserve(static_cast<std::size_t>(config.saved_draws()));
  for (int it = 1; it <= config.n_iter; ++it) {
    sampler.iterate();
#ifndef NDEBUG
    if (it % 100 == 0) sampler.check_invariants();
#endif
    if (config.is_saved(it)) {
      out.saved_partitions.push_back(sampler.partition());
      if (record_params) out.draws.push_back(sampler.snapshot());
    }
  }

  const auto& its = sampler.items();
  std::vector<int> item_sizes;
  item_sizes.reserve(its.size());
  for (const auto& item : its) item_sizes.push_back(item.size());
  const Partition& chosen = out.saved_partitions[dahl_least_squares_index(out.saved_partitions)];
  out.estimate = Partition::from_labels(chosen.labels, item_sizes);

  out.merged_items.resize(out.estimate.sizes.size());
  for (std::size_t i = 0; i < its.size(); ++i) {
    auto& ids = out.merged_items[static_cast<std::size_t>(out.estimate.labels[i])].obs_ids;
    ids.insert(ids.end(), its[i].obs_ids.begin(), its[i].obs_ids.end());
  }
  for (auto& m : out.merged_items) std::sort(m.obs_ids.begin(), m.obs_ids.end());
  return out;
}

}  // namespace sign
