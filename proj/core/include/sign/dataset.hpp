#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sign {

struct CategoricalColumn {
  std::string name;
  int levels = 2;

  bool operator==(const CategoricalColumn&) const = default;
};

/// Column layout shared by training data, traces and test rows.
struct Schema {
  std::string response = "z";
  std::vector<std::string> continuous;
  std::vector<CategoricalColumn> categorical;

  int num_continuous() const { return static_cast<int>(continuous.size()); }
  int num_categorical() const { return static_cast<int>(categorical.size()); }
  std::vector<int> levels() const;
  /// Probit design width: intercept + continuous + sum_j (levels_j - 1).
  int design_dim() const;
  /// Names unique, levels >= 2. Throws UsageError.
  void validate() const;

  bool operator==(const Schema&) const = default;
};

/// Covariates of one observation. Categorical codes are 0-based.
struct CovariateRow {
  std::span<const double> cont;
  std::span<const int> cat;
};

/// Binary outcomes plus complete continuous and categorical covariates,
/// stored row-major so a row is a pair of contiguous spans.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Schema schema);

  const Schema& schema() const { return schema_; }
  std::size_t size() const { return outcomes_.size(); }
  bool empty() const { return outcomes_.empty(); }

  /// Appends one observation. `cat` uses 0-based codes and is range-checked.
  void push_back(int outcome, std::span<const double> cont, std::span<const int> cat);

  int outcome(std::size_t i) const { return outcomes_[i]; }
  std::span<const std::uint8_t> outcomes() const { return outcomes_; }
  CovariateRow row(std::size_t i) const;
  std::span<const double> continuous_row(std::size_t i) const;
  std::span<const int> categorical_row(std::size_t i) const;

  /// Rows selected by index, in the given order.
  Dataset subset(std::span<const int> rows) const;

 private:
  Schema schema_;
  std::vector<std::uint8_t> outcomes_;
  std::vector<double> cont_;
  std::vector<int> cat_;
};

}  // namespace sign
