#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "csv.hpp"
#include "sign/errors.hpp"

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace sign::cli;
  CLI::App app{"Sharded Pitman-Yor PPMx clustering with probit classification"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("kind", sim.kind, "sim1 (clustered probit) or sim2 (nonlinear probit)")->required();
  simulate->add_option("--n", sim.n, "Number of rows")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CSV")->required();
  simulate->add_option("--schema", sim.schema_out, "Also write the schema JSON here");
  simulate->add_option("--truth", sim.truth_out, "Also write true cluster labels here (sim1)");

  FitOptions fit;
  auto* fitc = app.add_subcommand("fit", "Fit the model and write partition, trace and report");
  fitc->add_option("data", fit.data, "Training CSV")->required();
  fitc->add_option("schema", fit.schema, "Schema JSON")->required();
  fitc->add_option("config", fit.config, "Config JSON (optional)");
  fitc->add_option("--out-dir", fit.out_dir, "Directory for outputs")->capture_default_str();
  fitc->add_option("--seed", fit.seed, "Master seed");
  fitc->add_option("--workers", fit.workers, "Worker threads (default: available parallelism)");
  fitc->add_option("--max-items-per-shard", fit.max_items_per_shard, "Shard capacity R");
  fitc->add_option("--iters", fit.iters, "MCMC iterations per step");
  fitc->add_option("--burn-frac", fit.burn_frac, "Burn-in fraction");
  fitc->add_option("--thin", fit.thin, "Thinning interval");
  fitc->add_flag("--standardize", fit.standardize, "Standardize continuous covariates");
  fitc->add_flag("--quiet", fit.quiet, "No per-step progress on stderr");

  PredictOptions pred;
  auto* predict = app.add_subcommand("predict", "Posterior predictive probabilities for new rows");
  predict->add_option("model", pred.model, "model.trace from fit")->required();
  predict->add_option("data", pred.data, "Test CSV")->required();
  predict->add_option("--out", pred.out, "Output CSV")->capture_default_str();
  predict->add_option("--seed", pred.seed, "Seed for new-cluster coefficients")->capture_default_str();

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "AUC of predictions against observed outcomes");
  eval->add_option("predictions", ev.predictions, "predictions.csv")->required();
  eval->add_option("truth", ev.truth, "CSV with id and response columns")->required();
  eval->add_option("--response", ev.response, "Response column name")->capture_default_str();
  eval->add_option("--out", ev.out, "Output JSON")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*simulate) cmd_simulate(sim);
    if (*fitc) cmd_fit(fit);
    if (*predict) cmd_predict(pred);
    if (*eval) cmd_eval(ev);
  } catch (const sign::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
