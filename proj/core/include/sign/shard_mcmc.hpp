#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sign/dataset.hpp"
#include "sign/partition.hpp"
#include "sign/probit.hpp"
#include "sign/random.hpp"
#include "sign/similarity.hpp"

namespace sign {

/// A frozen group of observations clustered as one unit. Later steps may
/// merge items but never split them.
struct BlockItem {
  std::vector<int> obs_ids;  // sorted, non-empty

  int size() const { return static_cast<int>(obs_ids.size()); }
  bool operator==(const BlockItem&) const = default;
};

std::vector<BlockItem> singleton_items(std::size_t n);

/// Which likelihood factors enter the membership and parameter updates.
/// Switching terms off gives the conjugate or prior-only models the oracle
/// tests compare against.
struct ModelTerms {
  bool probit = true;
  bool covariates = true;

  bool operator==(const ModelTerms&) const = default;
};

struct Hyperparams {
  PYParams py;
  double tau_beta = 1.0;  // prior variance of each beta coefficient
  SimilarityHyper similarity;
  ModelTerms terms;

  /// alpha=1, d=0.5, tau_beta=1, mu0=0, v0=a_lambda=b_lambda=0.01,
  /// a_pi = 1/levels per categorical column.
  static Hyperparams defaults(const Schema& schema);
  void validate(const Schema& schema) const;

  bool operator==(const Hyperparams&) const = default;
};

struct McmcConfig {
  int n_iter = 10000;
  double burn_frac = 0.5;
  int thin = 5;
  std::uint64_t seed = 0;

  void validate() const;
  /// floor(n_iter (1 - burn_frac) / thin).
  int saved_draws() const;
  /// Iterations (1-based) that are recorded: the last saved_draws() multiples
  /// of `thin` counted back from n_iter.
  bool is_saved(int iteration) const;
};

/// theta*_c = {beta_c, xi_c}.
struct ClusterParams {
  Eigen::VectorXd beta;
  XiParams xi;
};

struct ClusterState {
  ClusterParams theta;
  CovariateStats stats;
  int size = 0;  // observations, not items
};

struct ShardState {
  std::vector<int> labels;  // one per item, contiguous 0..C-1
  std::vector<ClusterState> clusters;
};

/// One cluster of one saved draw, as needed for prediction.
struct ClusterDraw {
  int size = 0;
  Eigen::VectorXd beta;
  CovariateStats stats;
};

struct TraceDraw {
  std::vector<ClusterDraw> clusters;
};

/// Gibbs sampler over the block items of one shard.
///
/// Each iteration first redraws every cluster's parameters (xi from its
/// conjugate posterior, probit latents, then beta), then sweeps the items
/// in order. An item is reassigned using the Pitman-Yor block weights times
/// its likelihood under each cluster's parameters, with one auxiliary
/// new-cluster candidate. The candidate is drawn from the prior unless the
/// item was a singleton, in which case its old parameters are reused.
class ShardSampler {
 public:
  /// Starts from the all-singletons partition with prior parameters.
  ShardSampler(const Dataset& data, std::vector<BlockItem> items, const Hyperparams& hyper,
               std::uint64_t seed);
  ~ShardSampler();
  ShardSampler(ShardSampler&&) noexcept;
  ShardSampler& operator=(ShardSampler&&) noexcept;

  void update_cluster_params();
  void sweep_memberships();
  void iterate() {
    update_cluster_params();
    sweep_memberships();
  }

  /// Replaces the current partition; parameters of the new clusters are
  /// drawn from their full conditionals.
  void set_partition(std::span<const int> labels);

  const std::vector<BlockItem>& items() const;
  const ShardState& state() const;
  Partition partition() const;
  /// Current per-cluster sizes, beta and freshly recomputed covariate stats.
  TraceDraw snapshot() const;
  long total_observations() const;
  /// Throws StateError if sizes or stats disagree with a recomputation.
  void check_invariants() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Least-squares partition estimate: the saved partition closest in squared
/// error to the mean co-clustering matrix. Ties go to the earliest sample.
std::size_t dahl_least_squares_index(std::span<const Partition> saved);
Partition dahl_least_squares(std::span<const Partition> saved);

/// Mean co-clustering matrix (B x B) of the saved partitions.
Eigen::MatrixXd coclustering_matrix(std::span<const Partition> saved);

struct ShardOutput {
  std::vector<BlockItem> merged_items;  // one per estimated cluster
  Partition estimate;                   // over the input items
  std::vector<Partition> saved_partitions;
  std::vector<TraceDraw> draws;  // empty unless parameters were recorded
};

/// Runs the shard chain for config.n_iter iterations, keeps the thinned
/// post-burn-in partitions, and freezes the least-squares estimate into
/// merged items. With `record_params` each saved draw also keeps cluster
/// sizes, beta and covariate stats.
ShardOutput mcmc_shard(const Dataset& data, std::vector<BlockItem> items, const Hyperparams& hyper,
                       const McmcConfig& config, bool record_params);

}  // namespace sign
