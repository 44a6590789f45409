#include "sign/similarity.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sign/errors.hpp"

namespace sign {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2 pi)

}  // namespace

std::vector<double> SimilarityHyper::default_a_pi(std::span<const int> levels) {
  std::vector<double> out;
  out.reserve(levels.size());
  for (int r : levels) out.push_back(1.0 / static_cast<double>(r));
  return out;
}

void SimilarityHyper::validate(std::size_t num_categorical) const {
  if (!(v0 > 0.0 && a_lambda > 0.0 && b_lambda > 0.0)) {
    throw DomainError("similarity hyperparameters v0, a_lambda, b_lambda must be positive");
  }
  if (!std::isfinite(mu0)) throw DomainError("mu0 must be finite");
  if (a_pi.size() != num_categorical) {
    throw UsageError("a_pi needs one entry per categorical column");
  }
  for (double a : a_pi) {
    if (!(a > 0.0)) throw DomainError("a_pi entries must be positive");
  }
}

void ContSuffStat::add(double x) {
  ++count;
  sum += x;
  sum_sq += x * x;
}

void ContSuffStat::remove(double x) {
  if (count <= 0) throw StateError("removing a row from an empty continuous statistic");
  --count;
  if (count == 0) {
    sum = 0.0;
    sum_sq = 0.0;
    return;
  }
  sum -= x;
  sum_sq -= x * x;
}

void ContSuffStat::merge(const ContSuffStat& other) {
  count += other.count;
  sum += other.sum;
  sum_sq += other.sum_sq;
}

double ContSuffStat::centered_sum_sq() const {
  if (count == 0) return 0.0;
  const double ss = sum_sq - sum * mean();
  return ss > 0.0 ? ss : 0.0;
}

void CatSuffStat::add(int category) {
  if (category < 0 || category >= static_cast<int>(counts.size())) {
    throw DomainError("category out of range");
  }
  ++counts[static_cast<std::size_t>(category)];
  ++total;
}

void CatSuffStat::remove(int category) {
  if (category < 0 || category >= static_cast<int>(counts.size())) {
    throw DomainError("category out of range");
  }
  auto& c = counts[static_cast<std::size_t>(category)];
  if (c <= 0) throw StateError("removing a category that was never added");
  --c;
  --total;
}

void CatSuffStat::merge(const CatSuffStat& other) {
  if (other.counts.size() != counts.size()) throw UsageError("merging categorical stats of different width");
  for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
  total += other.total;
}

CovariateStats CovariateStats::empty(int num_continuous, std::span<const int> levels) {
  CovariateStats out;
  out.cont.resize(static_cast<std::size_t>(num_continuous));
  out.cat.reserve(levels.size());
  for (int r : levels) out.cat.emplace_back(r);
  return out;
}

void CovariateStats::add(const CovariateRow& row) {
  for (std::size_t j = 0; j < cont.size(); ++j) cont[j].add(row.cont[j]);
  for (std::size_t j = 0; j < cat.size(); ++j) cat[j].add(row.cat[j]);
}

void CovariateStats::remove(const CovariateRow& row) {
  for (std::size_t j = 0; j < cont.size(); ++j) cont[j].remove(row.cont[j]);
  for (std::size_t j = 0; j < cat.size(); ++j) cat[j].remove(row.cat[j]);
}

void CovariateStats::merge(const CovariateStats& other) {
  if (other.cont.size() != cont.size() || other.cat.size() != cat.size()) {
    throw UsageError("merging covariate stats with different schemas");
  }
  for (std::size_t j = 0; j < cont.size(); ++j) cont[j].merge(other.cont[j]);
  for (std::size_t j = 0; j < cat.size(); ++j) cat[j].merge(other.cat[j]);
}

long CovariateStats::count() const {
  if (!cont.empty()) return cont.front().count;
  if (!cat.empty()) return cat.front().total;
  return 0;
}

NormalGammaPosterior normal_gamma_posterior(const ContSuffStat& s, const SimilarityHyper& h) {
  const double n = static_cast<double>(s.count);
  const double v = h.v0 + n;
  if (s.count == 0) return {h.mu0, h.v0, h.a_lambda, h.b_lambda};
  const double xbar = s.mean();
  const double dev = xbar - h.mu0;
  return {
      (h.v0 * h.mu0 + n * xbar) / v,
      v,
      h.a_lambda + 0.5 * n,
      h.b_lambda + 0.5 * s.centered_sum_sq() + n * h.v0 * dev * dev / (2.0 * v),
  };
}

double log_marginal_normal_gamma(const ContSuffStat& s, const SimilarityHyper& h) {
  if (s.count == 0) return 0.0;
  const auto post = normal_gamma_posterior(s, h);
  const double n = static_cast<double>(s.count);
  return -0.5 * n * kLogTwoPi + 0.5 * std::log(h.v0 / post.v) + h.a_lambda * std::log(h.b_lambda) -
         post.shape * std::log(post.rate) + std::lgamma(post.shape) - std::lgamma(h.a_lambda);
}

double log_marginal_dirichlet(const CatSuffStat& s, double a_pi) {
  if (s.total == 0) return 0.0;
  const double total_conc = a_pi * static_cast<double>(s.counts.size());
  double acc = std::lgamma(total_conc) - std::lgamma(total_conc + static_cast<double>(s.total));
  const double lg_a = std::lgamma(a_pi);
  for (long c : s.counts) {
    if (c > 0) acc += std::lgamma(a_pi + static_cast<double>(c)) - lg_a;
  }
  return acc;
}

double log_marginal_g(const CovariateStats& stats, const SimilarityHyper& h) {
  double acc = 0.0;
  for (const auto& s : stats.cont) acc += log_marginal_normal_gamma(s, h);
  for (std::size_t j = 0; j < stats.cat.size(); ++j) acc += log_marginal_dirichlet(stats.cat[j], h.a_pi[j]);
  return acc;
}

double log_predictive_ratio(const CovariateRow& row, const CovariateStats& stats,
                            const SimilarityHyper& h) {
  double acc = 0.0;
  for (std::size_t j = 0; j < stats.cont.size(); ++j) {
    const auto post = normal_gamma_posterior(stats.cont[j], h);
    // Student-t with 2a dof, location mean, squared scale b (v+1) / (a v).
    const double dof = 2.0 * post.shape;
    const double scale_sq = post.rate * (post.v + 1.0) / (post.shape * post.v);
    const double dev = row.cont[j] - post.mean;
    acc += std::lgamma(post.shape + 0.5) - std::lgamma(post.shape) -
           0.5 * std::log(dof * std::numbers::pi * scale_sq) -
           (post.shape + 0.5) * std::log1p(dev * dev / (dof * scale_sq));
  }
  for (std::size_t j = 0; j < stats.cat.size(); ++j) {
    const auto& s = stats.cat[j];
    const int k = row.cat[j];
    if (k < 0 || k >= static_cast<int>(s.counts.size())) throw DomainError("category out of range");
    const double a = h.a_pi[j];
    acc += std::log(static_cast<double>(s.counts[static_cast<std::size_t>(k)]) + a) -
           std::log(static_cast<double>(s.total) + a * static_cast<double>(s.counts.size()));
  }
  return acc;
}

XiParams sample_xi_posterior(const CovariateStats& stats, const SimilarityHyper& h, Rng& rng) {
  XiParams xi;
  xi.mu.reserve(stats.cont.size());
  xi.lambda.reserve(stats.cont.size());
  for (const auto& s : stats.cont) {
    const auto post = normal_gamma_posterior(s, h);
    const double lambda = rng.gamma(post.shape, post.rate);
    xi.lambda.push_back(lambda);
    xi.mu.push_back(rng.normal(post.mean, 1.0 / std::sqrt(post.v * lambda)));
  }
  xi.pi.reserve(stats.cat.size());
  std::vector<double> conc;
  for (std::size_t j = 0; j < stats.cat.size(); ++j) {
    const auto& s = stats.cat[j];
    conc.assign(s.counts.size(), h.a_pi[j]);
    for (std::size_t k = 0; k < conc.size(); ++k) conc[k] += static_cast<double>(s.counts[k]);
    xi.pi.push_back(rng.dirichlet(conc));
  }
  return xi;
}

double log_density_x_given_xi(const CovariateRow& row, const XiParams& xi) {
  double acc = 0.0;
  for (std::size_t j = 0; j < xi.mu.size(); ++j) {
    const double dev = row.cont[j] - xi.mu[j];
    acc += 0.5 * (std::log(xi.lambda[j]) - kLogTwoPi - xi.lambda[j] * dev * dev);
  }
  for (std::size_t j = 0; j < xi.pi.size(); ++j) {
    const int k = row.cat[j];
    if (k < 0 || k >= static_cast<int>(xi.pi[j].size())) {
      throw DomainError("category " + std::to_string(k + 1) + " out of range");
    }
    acc += std::log(xi.pi[j][static_cast<std::size_t>(k)]);
  }
  return acc;
}

double log_density_stats_given_xi(const CovariateStats& stats, const XiParams& xi) {
  double acc = 0.0;
  for (std::size_t j = 0; j < stats.cont.size(); ++j) {
    const auto& s = stats.cont[j];
    if (s.count == 0) continue;
    const double n = static_cast<double>(s.count);
    const double dev = s.mean() - xi.mu[j];
    acc += 0.5 * n * (std::log(xi.lambda[j]) - kLogTwoPi) -
           0.5 * xi.lambda[j] * (s.centered_sum_sq() + n * dev * dev);
  }
  for (std::size_t j = 0; j < stats.cat.size(); ++j) {
    const auto& counts = stats.cat[j].counts;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] > 0) acc += static_cast<double>(counts[k]) * std::log(xi.pi[j][k]);
    }
  }
  return acc;
}

}  // namespace sign
