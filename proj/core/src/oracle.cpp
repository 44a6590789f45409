#include "sign/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "sign/errors.hpp"
#include "sign/similarity.hpp"

namespace sign {

std::uint64_t bell_number(int n) {
  if (n < 0 || n > 25) throw UsageError("Bell numbers are tabulated for 0 <= n <= 25");
  // Bell triangle.
  std::vector<std::uint64_t> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

std::vector<std::vector<int>> enumerate_partitions(int num_items) {
  if (num_items < 0 || num_items > 12) throw UsageError("partition enumeration supports at most 12 items");
  std::vector<std::vector<int>> out;
  if (num_items == 0) {
    out.emplace_back();
    return out;
  }
  const auto n = static_cast<std::size_t>(num_items);
  std::vector<int> a(n, 0);
  std::vector<int> maxes(n, 0);  // maxes[i] = max(a[0..i-1])
  while (true) {
    out.push_back(a);
    // Increment the rightmost position that can still grow.
    std::size_t i = n - 1;
    while (i > 0 && a[i] > maxes[i]) --i;
    if (i == 0) break;
    ++a[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      maxes[j] = std::max(maxes[j - 1], a[j - 1]);
    }
  }
  return out;
}

std::vector<double> crp_weights(std::span<const int> sizes, double alpha) {
  std::vector<double> w(sizes.begin(), sizes.end());
  w.push_back(alpha);
  return w;
}

Eigen::MatrixXd brute_force_coclustering(const Dataset& data, const std::vector<BlockItem>& items,
                                         const Hyperparams& hyper) {
  const int b = static_cast<int>(items.size());
  if (b > 10) throw UsageError("brute-force co-clustering supports at most 10 items");
  hyper.validate(data.schema());

  std::vector<CovariateStats> item_stats;
  std::vector<int> item_sizes;
  for (const auto& item : items) {
    CovariateStats s = CovariateStats::empty(data.schema());
    for (int obs : item.obs_ids) s.add(data.row(static_cast<std::size_t>(obs)));
    item_stats.push_back(std::move(s));
    item_sizes.push_back(static_cast<int>(item.size()));
  }

  const auto parts = enumerate_partitions(b);
  std::vector<double> logw(parts.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& labels = parts[k];
    const int c = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<int> sizes(static_cast<std::size_t>(c), 0);
    std::vector<CovariateStats> stats(static_cast<std::size_t>(c), CovariateStats::empty(data.schema()));
    for (int i = 0; i < b; ++i) {
      const auto l = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
      sizes[l] += item_sizes[static_cast<std::size_t>(i)];
      stats[l].merge(item_stats[static_cast<std::size_t>(i)]);
    }
    double lw = py_log_eppf(sizes, hyper.py);
    if (hyper.terms.covariates) {
      for (const auto& s : stats) lw += log_marginal_g(s, hyper.similarity);
    }
    logw[k] = lw;
  }

  const double top = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  Eigen::MatrixXd co = Eigen::MatrixXd::Zero(b, b);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double w = std::exp(logw[k] - top);
    total += w;
    for (int i = 0; i < b; ++i) {
      for (int j = 0; j < b; ++j) {
        if (parts[k][static_cast<std::size_t>(i)] == parts[k][static_cast<std::size_t>(j)]) co(i, j) += w;
      }
    }
  }
  return co / total;
}

}  // namespace sign
