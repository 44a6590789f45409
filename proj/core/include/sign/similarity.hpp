#pragma once

#include <span>
#include <vector>

#include "sign/dataset.hpp"
#include "sign/random.hpp"

namespace sign {

/// Hyperparameters of the auxiliary covariate model. Continuous columns use
/// N(w | mu, 1/lambda) with mu | lambda ~ N(mu0, 1/(v0 lambda)) and
/// lambda ~ Ga(a_lambda, b_lambda) (rate). Categorical column j uses a
/// symmetric Dirichlet(a_pi[j]) prior on its category probabilities.
struct SimilarityHyper {
  double mu0 = 0.0;
  double v0 = 0.01;
  double a_lambda = 0.01;
  double b_lambda = 0.01;
  std::vector<double> a_pi;

  /// 1 / levels_j for every categorical column.
  static std::vector<double> default_a_pi(std::span<const int> levels);
  void validate(std::size_t num_categorical) const;

  bool operator==(const SimilarityHyper&) const = default;
};

struct ContSuffStat {
  long count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x);
  /// Throws StateError if the count would go negative.
  void remove(double x);
  void merge(const ContSuffStat& other);
  double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
  /// sum (x - mean)^2, clamped at zero against cancellation.
  double centered_sum_sq() const;

  bool operator==(const ContSuffStat&) const = default;
};

struct CatSuffStat {
  std::vector<long> counts;
  long total = 0;

  explicit CatSuffStat(int levels = 0) : counts(static_cast<std::size_t>(levels), 0) {}
  void add(int category);
  void remove(int category);
  void merge(const CatSuffStat& other);

  bool operator==(const CatSuffStat&) const = default;
};

/// Per-column sufficient statistics of a set of covariate rows.
struct CovariateStats {
  std::vector<ContSuffStat> cont;
  std::vector<CatSuffStat> cat;

  static CovariateStats empty(int num_continuous, std::span<const int> levels);
  static CovariateStats empty(const Schema& schema) {
    const auto lv = schema.levels();
    return empty(schema.num_continuous(), lv);
  }

  void add(const CovariateRow& row);
  void remove(const CovariateRow& row);
  void merge(const CovariateStats& other);
  /// Number of rows summarised (0 for a schema without covariates).
  long count() const;

  bool operator==(const CovariateStats&) const = default;
};

/// Cluster-specific auxiliary parameters xi_c.
struct XiParams {
  std::vector<double> mu;
  std::vector<double> lambda;
  std::vector<std::vector<double>> pi;

  bool operator==(const XiParams&) const = default;
};

/// Conjugate normal-gamma posterior (mean, v, shape, rate) for one column.
struct NormalGammaPosterior {
  double mean;
  double v;
  double shape;
  double rate;
};

NormalGammaPosterior normal_gamma_posterior(const ContSuffStat& s, const SimilarityHyper& h);

/// Closed-form log marginal of one continuous column.
double log_marginal_normal_gamma(const ContSuffStat& s, const SimilarityHyper& h);
/// Ordered-sequence Dirichlet-categorical log marginal of one column.
double log_marginal_dirichlet(const CatSuffStat& s, double a_pi);

/// log g(x*_c): product of the per-column auxiliary marginals. 0 when empty.
double log_marginal_g(const CovariateStats& stats, const SimilarityHyper& h);

/// log q(x | x*_c) = log g(x*_c + x) - log g(x*_c), evaluated with the
/// Student-t and Dirichlet-categorical predictive densities.
double log_predictive_ratio(const CovariateRow& row, const CovariateStats& stats,
                            const SimilarityHyper& h);

/// Draws xi_c from its conjugate posterior (or the prior when stats are empty).
XiParams sample_xi_posterior(const CovariateStats& stats, const SimilarityHyper& h, Rng& rng);

/// sum_j log N(w_j | mu_j, 1/lambda_j) + sum_j log pi_j[u_j].
double log_density_x_given_xi(const CovariateRow& row, const XiParams& xi);

/// Sum of log_density_x_given_xi over all rows summarised by `stats`.
double log_density_stats_given_xi(const CovariateStats& stats, const XiParams& xi);

}  // namespace sign
