#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sign/dataset.hpp"
#include "sign/partition.hpp"
#include "sign/shard_mcmc.hpp"

namespace sign {

/// Bell number B_n for n <= 25.
std::uint64_t bell_number(int n);

/// Every set partition of {0..B-1} as a restricted growth string
/// (labels contiguous, first appearance order), in lexicographic order.
/// Throws UsageError for B > 12.
std::vector<std::vector<int>> enumerate_partitions(int num_items);

/// Chinese restaurant weights for a new arrival: n_c per existing table,
/// alpha for a new one (last entry).
std::vector<double> crp_weights(std::span<const int> sizes, double alpha);

/// Exact posterior co-clustering of items under the similarity-only model,
/// by enumerating all item partitions. Mass of a partition is the PY EPPF of
/// its observation counts times the marginal similarity of every cluster.
/// Throws UsageError for more than 10 items.
Eigen::MatrixXd brute_force_coclustering(const Dataset& data, const std::vector<BlockItem>& items,
                                         const Hyperparams& hyper);

}  // namespace sign
