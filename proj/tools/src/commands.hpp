#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sign::cli {

struct SimulateOptions {
  std::string kind;  // "sim1" or "sim2"
  int n = 800;
  std::uint64_t seed = 0;
  std::string out;
  std::string schema_out;  // optional
  std::string truth_out;   // optional, sim1 only
};

struct FitOptions {
  std::string data;
  std::string schema;
  std::string config;  // optional
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> max_items_per_shard;
  std::optional<int> iters;
  std::optional<double> burn_frac;
  std::optional<int> thin;
  bool standardize = false;
  bool quiet = false;
};

struct PredictOptions {
  std::string model;
  std::string data;
  std::string out = "predictions.csv";
  std::uint64_t seed = 0;
};

struct EvalOptions {
  std::string predictions;
  std::string truth;
  std::string response = "z";
  std::string out = "metrics.json";
};

void cmd_simulate(const SimulateOptions& opt);
void cmd_fit(const FitOptions& opt);
void cmd_predict(const PredictOptions& opt);
void cmd_eval(const EvalOptions& opt);

}  // namespace sign::cli
