#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sign/dataset.hpp"

namespace sign {

/// Five continuous columns w1..w5 and five three-level categorical columns u1..u5.
Schema sim_schema();

struct Sim1Cluster {
  Eigen::Matrix<double, 5, 1> mean;
  Eigen::Matrix<double, 5, 5> cov;
};

/// Means and covariances of the five Simulation I clusters.
const std::array<Sim1Cluster, 5>& sim1_clusters();

/// Probit linear predictor of Simulation I for a row of cluster `cluster` (0-based).
/// Categorical codes are 0-based, so "category 2" is code 1.
double sim1_eta(int cluster, std::span<const double> w, std::span<const int> u);

/// Nonlinear probit linear predictor of Simulation II.
double sim2_eta(std::span<const double> w, std::span<const int> u);

struct LabeledDataset {
  Dataset data;
  std::vector<int> truth;  // 0-based generating cluster per row
};

/// n/5 rows per cluster, rows in random order. Throws UsageError unless 5 | n.
LabeledDataset gen_sim1(int n, std::uint64_t seed);

/// i.i.d. rows without cluster structure.
Dataset gen_sim2(int n, std::uint64_t seed);

/// Fraction of rows misassigned after the best one-to-one matching of
/// estimated to true labels (Hungarian assignment on the confusion matrix).
double misclustering_rate(std::span<const int> truth, std::span<const int> estimate);

}  // namespace sign
