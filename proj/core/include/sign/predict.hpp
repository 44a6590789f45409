#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sign/dataset.hpp"
#include "sign/random.hpp"
#include "sign/shard_mcmc.hpp"

namespace sign {

/// Saved draws of the final SIGN step, reduced to what prediction needs:
/// per-cluster size, probit coefficients and covariate sufficient statistics.
struct PosteriorTrace {
  Schema schema;
  Hyperparams hyper;
  long num_observations = 0;
  std::vector<TraceDraw> draws;

  /// T >= 1 and every draw's sizes sum to num_observations.
  void validate() const;
};

/// Posterior predictive P(z = 1 | x) averaged over the trace draws.
///
/// Within draw t the new subject joins existing cluster c with weight
/// (n_c - d) q(x | x*_c) and a new cluster with weight (alpha + d C) g(x);
/// weights are normalized per draw and mixed over Phi(x beta_c). The new
/// cluster's beta is supplied per draw by the caller.
double predict_prob_with(const CovariateRow& x, const PosteriorTrace& trace,
                         std::span<const Eigen::VectorXd> new_cluster_betas);

/// Same, drawing one prior beta per trace draw from `rng`.
double predict_prob(const CovariateRow& x, const PosteriorTrace& trace, Rng& rng);

/// Batch predictor. Draws the new-cluster coefficients once per trace draw
/// from a dedicated seeded stream, so every row sees the same ones.
class Predictor {
 public:
  Predictor(const PosteriorTrace& trace, std::uint64_t seed);

  double operator()(const CovariateRow& x) const;
  /// Rows are split into contiguous chunks across `workers` threads.
  std::vector<double> predict(const Dataset& rows, int workers = 1) const;

 private:
  const PosteriorTrace* trace_;
  std::vector<Eigen::VectorXd> new_betas_;
};

/// Area under the ROC curve as the Mann-Whitney statistic; ties count 1/2.
/// Throws UsageError unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace sign
