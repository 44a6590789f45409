#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sign {

/// Pitman-Yor concentration and discount. discount == 0 is the Dirichlet
/// process.
struct PYParams {
  double alpha = 1.0;
  double discount = 0.5;

  /// Throws DomainError unless alpha > 0 and 0 <= discount < 1.
  void validate() const;

  bool operator==(const PYParams&) const = default;
};

/// log of the rising factorial (x)_n = x (x+1) ... (x+n-1).
double log_rising_factorial(double x, long n);

/// log of the generalized Pochhammer symbol (x|y)_n = x (x+y) ... (x+(n-1)y).
/// Every factor must be positive.
double log_pochhammer_incr(double x, double y, long n);

/// Unnormalized log EPPF of the Pitman-Yor partition prior,
/// log[(alpha|d)_C * prod_c (1-d)_{n_c - 1}].
double py_log_eppf(std::span<const int> sizes, const PYParams& py);

/// Prior log weights for placing an item of `item_size` observations into each
/// of the existing clusters (sizes measured without the item) or into a new
/// one, which occupies the last slot of `out`.
///
///   existing c : log Gamma(n_c + r - d) - log Gamma(n_c - d)
///   new        : log(alpha + d C) + log Gamma(r - d) - log Gamma(1 - d)
///
/// `out` must hold sizes_minus_item.size() + 1 entries.
void block_membership_log_weights(int item_size, std::span<const int> sizes_minus_item,
                                  const PYParams& py, std::span<double> out);

std::vector<double> block_membership_log_weights(int item_size,
                                                 std::span<const int> sizes_minus_item,
                                                 const PYParams& py);

/// Draws an index with probability proportional to exp(log_weights[k]),
/// using one uniform variate `u` in (0, 1). Subtracts the maximum before
/// exponentiating. If every weight is -inf the draw is uniform.
std::size_t sample_from_log_weights(std::span<const double> log_weights, double u);

/// A partition of items into contiguous clusters 0..C-1.
///
/// `sizes` are counted in original-observation units, so an item holding
/// r observations contributes r to its cluster.
struct Partition {
  std::vector<int> labels;
  std::vector<int> sizes;

  int num_clusters() const { return static_cast<int>(sizes.size()); }
  std::size_t num_items() const { return labels.size(); }

  /// Builds a partition from arbitrary integer labels, relabelling clusters in
  /// order of first appearance. `item_sizes` defaults to one observation per
  /// item when empty.
  static Partition from_labels(std::span<const int> raw_labels,
                               std::span<const int> item_sizes = {});

  /// Checks contiguity, positivity and that sizes add up to
  /// `total_observations` (or to the item count when item sizes are unit).
  void validate(long total_observations) const;

  bool operator==(const Partition&) const = default;
};

}  // namespace sign
