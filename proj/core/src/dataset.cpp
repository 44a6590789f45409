#include "sign/dataset.hpp"

#include <set>

#include "sign/errors.hpp"

namespace sign {

std::vector<int> Schema::levels() const {
  std::vector<int> out;
  out.reserve(categorical.size());
  for (const auto& c : categorical) out.push_back(c.levels);
  return out;
}

int Schema::design_dim() const {
  int dim = 1 + num_continuous();
  for (const auto& c : categorical) dim += c.levels - 1;
  return dim;
}

void Schema::validate() const {
  std::set<std::string> names{response};
  for (const auto& name : continuous) {
    if (!names.insert(name).second) throw UsageError("duplicate column name '" + name + "'");
  }
  for (const auto& c : categorical) {
    if (!names.insert(c.name).second) throw UsageError("duplicate column name '" + c.name + "'");
    if (c.levels < 2) {
      throw UsageError("categorical column '" + c.name + "' needs at least 2 levels");
    }
  }
}

Dataset::Dataset(Schema schema) : schema_(std::move(schema)) { schema_.validate(); }

void Dataset::push_back(int outcome, std::span<const double> cont, std::span<const int> cat) {
  if (outcome != 0 && outcome != 1) throw DomainError("outcome must be 0 or 1");
  if (static_cast<int>(cont.size()) != schema_.num_continuous() ||
      static_cast<int>(cat.size()) != schema_.num_categorical()) {
    throw UsageError("row width does not match the schema");
  }
  for (std::size_t j = 0; j < cat.size(); ++j) {
    if (cat[j] < 0 || cat[j] >= schema_.categorical[j].levels) {
      throw DomainError("category out of range in column '" + schema_.categorical[j].name + "'");
    }
  }
  outcomes_.push_back(static_cast<std::uint8_t>(outcome));
  cont_.insert(cont_.end(), cont.begin(), cont.end());
  cat_.insert(cat_.end(), cat.begin(), cat.end());
}

std::span<const double> Dataset::continuous_row(std::size_t i) const {
  const std::size_t p = schema_.continuous.size();
  return std::span<const double>(cont_).subspan(i * p, p);
}

std::span<const int> Dataset::categorical_row(std::size_t i) const {
  const std::size_t q = schema_.categorical.size();
  return std::span<const int>(cat_).subspan(i * q, q);
}

CovariateRow Dataset::row(std::size_t i) const { return {continuous_row(i), categorical_row(i)}; }

Dataset Dataset::subset(std::span<const int> rows) const {
  Dataset out(schema_);
  for (int r : rows) {
    out.push_back(outcome(static_cast<std::size_t>(r)), continuous_row(static_cast<std::size_t>(r)),
                  categorical_row(static_cast<std::size_t>(r)));
  }
  return out;
}

}  // namespace sign
