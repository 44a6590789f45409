#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sign/dataset.hpp"
#include "sign/predict.hpp"
#include "sign/sign.hpp"

namespace sign::cli {

using nlohmann::json;

json schema_to_json(const Schema& schema);
Schema schema_from_json(const json& j);
Schema load_schema(const std::string& path);

/// Everything a fit reads from config.json. Missing keys keep the defaults.
struct FitSettings {
  SignConfig sign;
  Hyperparams hyper;
  bool standardize = false;
};

/// Applies a config object on top of `settings`. Unknown keys are rejected.
void apply_config(const json& j, FitSettings& settings);
json load_json(const std::string& path);

/// Per-column affine map of continuous covariates to zero mean, unit sd.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> sd;

  static Standardization fit(const Dataset& data);
  Dataset apply(const Dataset& data) const;
};

struct ModelFile {
  PosteriorTrace trace;
  std::optional<Standardization> standardization;
};

inline constexpr int kTraceVersion = 1;

/// CBOR container tagged with a format name and version; doubles are kept
/// bit-exact.
std::vector<std::uint8_t> encode_model(const ModelFile& model);
ModelFile decode_model(const std::vector<std::uint8_t>& bytes);
void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

}  // namespace sign::cli
