#include "sign/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "sign/errors.hpp"

namespace sign {

namespace {

// Direct summation keeps small products exact to the last ulp; lgamma
// differences take over once the loop would get long.
constexpr long kDirectSumLimit = 64;

}  // namespace

void PYParams::validate() const {
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw DomainError("Pitman-Yor discount must lie in [0, 1), got " + std::to_string(discount));
  }
  if (!(alpha > 0.0)) {
    throw DomainError("Pitman-Yor concentration must be positive, got " + std::to_string(alpha));
  }
}

double log_rising_factorial(double x, long n) {
  if (!(x > 0.0)) throw DomainError("rising factorial needs x > 0");
  if (n < 0) throw DomainError("rising factorial needs n >= 0");
  if (n <= kDirectSumLimit) {
    double acc = 0.0;
    for (long k = 0; k < n; ++k) acc += std::log(x + static_cast<double>(k));
    return acc;
  }
  return std::lgamma(x + static_cast<double>(n)) - std::lgamma(x);
}

double log_pochhammer_incr(double x, double y, long n) {
  if (n < 0) throw DomainError("Pochhammer symbol needs n >= 0");
  if (n == 0) return 0.0;
  if (!(x > 0.0)) throw DomainError("Pochhammer symbol needs x > 0");
  if (y == 0.0) return static_cast<double>(n) * std::log(x);
  if (y > 0.0) {
    // x (x+y) ... = y^n (x/y)_n
    return static_cast<double>(n) * std::log(y) + log_rising_factorial(x / y, n);
  }
  if (!(x + static_cast<double>(n - 1) * y > 0.0)) {
    throw DomainError("Pochhammer symbol has a non-positive factor");
  }
  double acc = 0.0;
  for (long k = 0; k < n; ++k) acc += std::log(x + static_cast<double>(k) * y);
  return acc;
}

double py_log_eppf(std::span<const int> sizes, const PYParams& py) {
  py.validate();
  const long clusters = static_cast<long>(sizes.size());
  double acc = log_pochhammer_incr(py.alpha, py.discount, clusters);
  for (int n : sizes) {
    if (n <= 0) throw DomainError("cluster sizes must be positive");
    acc += log_rising_factorial(1.0 - py.discount, n - 1);
  }
  return acc;
}

void block_membership_log_weights(int item_size, std::span<const int> sizes_minus_item,
                                  const PYParams& py, std::span<double> out) {
  if (item_size < 1) throw DomainError("item size must be at least 1");
  if (out.size() != sizes_minus_item.size() + 1) {
    throw UsageError("membership weight buffer has the wrong length");
  }
  const double d = py.discount;
  for (std::size_t c = 0; c < sizes_minus_item.size(); ++c) {
    const int n = sizes_minus_item[c];
    if (n < 1) throw DomainError("existing cluster sizes must be at least 1");
    out[c] = log_rising_factorial(static_cast<double>(n) - d, item_size);
  }
  const double clusters = static_cast<double>(sizes_minus_item.size());
  out.back() = std::log(py.alpha + d * clusters) + log_rising_factorial(1.0 - d, item_size - 1);
}

std::vector<double> block_membership_log_weights(int item_size,
                                                 std::span<const int> sizes_minus_item,
                                                 const PYParams& py) {
  py.validate();
  std::vector<double> out(sizes_minus_item.size() + 1);
  block_membership_log_weights(item_size, sizes_minus_item, py, out);
  return out;
}

std::size_t sample_from_log_weights(std::span<const double> log_weights, double u) {
  if (log_weights.empty()) throw UsageError("cannot sample from an empty weight vector");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (top == -std::numeric_limits<double>::infinity()) {
    const auto k = static_cast<std::size_t>(u * static_cast<double>(log_weights.size()));
    return std::min(k, log_weights.size() - 1);
  }
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - top);
  double target = u * total;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    target -= std::exp(log_weights[k] - top);
    if (target <= 0.0) return k;
  }
  // Round-off left a sliver of mass; fall back to the last positive weight.
  for (std::size_t k = log_weights.size(); k-- > 0;) {
    if (log_weights[k] > -std::numeric_limits<double>::infinity()) return k;
  }
  return log_weights.size() - 1;
}

Partition Partition::from_labels(std::span<const int> raw_labels, std::span<const int> item_sizes) {
  if (!item_sizes.empty() && item_sizes.size() != raw_labels.size()) {
    throw UsageError("item size vector does not match label vector");
  }
  Partition out;
  out.labels.resize(raw_labels.size());
  std::unordered_map<int, int> relabel;
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    auto [it, inserted] = relabel.try_emplace(raw_labels[i], static_cast<int>(relabel.size()));
    if (inserted) out.sizes.push_back(0);
    out.labels[i] = it->second;
    out.sizes[it->second] += item_sizes.empty() ? 1 : item_sizes[i];
  }
  return out;
}

void Partition::validate(long total_observations) const {
  std::vector<int> seen(sizes.size(), 0);
  for (int label : labels) {
    if (label < 0 || label >= num_clusters()) throw StateError("partition label out of range");
    seen[label] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw StateError("partition labels are not contiguous");
  }
  long total = 0;
  for (int s : sizes) {
    if (s <= 0) throw StateError("partition has a non-positive cluster size");
    total += s;
  }
  if (total != total_observations) throw StateError("partition sizes do not sum to the observation count");
}

}  // namespace sign
