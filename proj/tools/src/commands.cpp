#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>
#include <unordered_map>

#include "csv.hpp"
#include "model_io.hpp"
#include "sign/errors.hpp"
#include "sign/predict.hpp"
#include "sign/sign.hpp"
#include "sign/synth.hpp"

namespace sign::cli {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

void write_json(const std::string& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

}  // namespace

void cmd_simulate(const SimulateOptions& opt) {
  if (opt.n < 0) throw UsageError("--n must be non-negative");
  Dataset data;
  std::vector<int> truth;
  if (opt.kind == "sim1") {
    auto sim = gen_sim1(opt.n, opt.seed);
    data = std::move(sim.data);
    truth = std::move(sim.truth);
  } else if (opt.kind == "sim2") {
    data = gen_sim2(opt.n, opt.seed);
  } else {
    throw UsageError("unknown simulation kind '" + opt.kind + "' (expected sim1 or sim2)");
  }
  auto out = open_out(opt.out);
  write_dataset(out, data);
  if (!opt.schema_out.empty()) write_json(opt.schema_out, schema_to_json(data.schema()));
  if (!opt.truth_out.empty()) {
    if (truth.empty() && opt.n > 0) throw UsageError("--truth is only available for sim1");
    auto t = open_out(opt.truth_out);
    t << "id,cluster\n";
    for (std::size_t i = 0; i < truth.size(); ++i) t << i << ',' << truth[i] + 1 << '\n';
  }
}

void cmd_fit(const FitOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const Schema schema = load_schema(opt.schema);
  LoadedData loaded = load_dataset(opt.data, schema, true);

  FitSettings settings;
  settings.hyper = Hyperparams::defaults(schema);
  settings.sign.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (!opt.config.empty()) apply_config(load_json(opt.config), settings);
  if (opt.seed) settings.sign.master_seed = *opt.seed;
  if (opt.workers) settings.sign.workers = *opt.workers;
  if (opt.max_items_per_shard) settings.sign.max_items_per_shard = *opt.max_items_per_shard;
  if (opt.iters) settings.sign.mcmc.n_iter = *opt.iters;
  if (opt.burn_frac) settings.sign.mcmc.burn_frac = *opt.burn_frac;
  if (opt.thin) settings.sign.mcmc.thin = *opt.thin;
  if (opt.standardize) settings.standardize = true;
  if (opt.quiet) settings.sign.progress = false;

  ModelFile model;
  Dataset data = std::move(loaded.data);
  if (settings.standardize) {
    model.standardization = Standardization::fit(data);
    data = model.standardization->apply(data);
  }
  SignReport report = run_sign(data, settings.hyper, settings.sign);
  model.trace = std::move(report.final_trace);

  const std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  {
    auto out = open_out((dir / "partition.csv").string());
    out << "observation_id,label\n";
    for (std::size_t i = 0; i < report.final_partition.labels.size(); ++i) {
      out << loaded.ids[i] << ',' << report.final_partition.labels[i] + 1 << '\n';
    }
  }
  save_model((dir / "model.trace").string(), model);

  json steps = json::array();
  for (const auto& s : report.steps) {
    steps.push_back({{"step", s.step},
                     {"items_in", s.items_in},
                     {"shards", s.shards},
                     {"items_out", s.items_out},
                     {"final", s.final},
                     {"seconds", s.seconds}});
  }
  json r = {{"seed", settings.sign.master_seed},
            {"n", data.size()},
            {"max_items_per_shard", settings.sign.max_items_per_shard},
            {"workers", settings.sign.workers},
            {"num_steps", report.num_steps()},
            {"steps", steps},
            {"num_clusters", report.final_partition.num_clusters()},
            {"cluster_sizes", report.final_partition.sizes},
            {"saved_draws", model.trace.draws.size()},
            {"standardized", settings.standardize},
            {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  write_json((dir / "report.json").string(), r);
}

void cmd_predict(const PredictOptions& opt) {
  const ModelFile model = load_model(opt.model);
  LoadedData loaded = load_dataset(opt.data, model.trace.schema, false);
  Dataset rows = model.standardization ? model.standardization->apply(loaded.data) : std::move(loaded.data);
  auto out = open_out(opt.out);
  out << "id,probability\n";
  if (rows.empty()) return;
  const Predictor predictor(model.trace, opt.seed);
  const auto probs = predictor.predict(rows);
  out.precision(17);
  for (std::size_t i = 0; i < probs.size(); ++i) out << loaded.ids[i] << ',' << probs[i] << '\n';
}

void cmd_eval(const EvalOptions& opt) {
  const CsvTable preds = read_csv_file(opt.predictions);
  const CsvTable truth = read_csv_file(opt.truth);
  const int p_id = preds.column("id");
  const int p_prob = preds.column("probability");
  if (p_id < 0 || p_prob < 0) throw InputError(opt.predictions + ": expected columns 'id' and 'probability'");
  const int t_z = truth.column(opt.response);
  if (t_z < 0) throw InputError(opt.truth + ": response column '" + opt.response + "' not found in header");
  const int t_id = truth.column("id");

  std::unordered_map<std::string, int> outcome_by_id;
  for (std::size_t r = 0; r < truth.rows.size(); ++r) {
    const long z = parse_long(truth.rows[r][static_cast<std::size_t>(t_z)], opt.truth, truth.line_numbers[r], opt.response);
    if (z != 0 && z != 1) throw InputError(opt.truth + ":" + std::to_string(truth.line_numbers[r]) + ": response must be 0 or 1");
    const std::string id = t_id >= 0 ? truth.rows[r][static_cast<std::size_t>(t_id)] : std::to_string(r);
    if (!outcome_by_id.emplace(id, static_cast<int>(z)).second) throw InputError(opt.truth + ": duplicate id '" + id + "'");
  }

  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t r = 0; r < preds.rows.size(); ++r) {
    const auto& row = preds.rows[r];
    const std::string& id = row[static_cast<std::size_t>(p_id)];
    const auto it = outcome_by_id.find(id);
    if (it == outcome_by_id.end()) throw InputError(opt.predictions + ": id '" + id + "' has no truth row");
    scores.push_back(parse_double(row[static_cast<std::size_t>(p_prob)], opt.predictions, preds.line_numbers[r], "probability"));
    labels.push_back(it->second);
  }
  if (scores.size() != outcome_by_id.size()) throw InputError("predictions and truth cover different ids");
  long n_pos = 0;
  for (int z : labels) n_pos += z;
  const long n_neg = static_cast<long>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UsageError("truth contains a single class; AUC is undefined");
  write_json(opt.out, {{"auc", auc(scores, labels)}, {"n_pos", n_pos}, {"n_neg", n_neg}});
}

}  // namespace sign::cli
