#include "model_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "csv.hpp"
#include "sign/errors.hpp"

namespace sign::cli {

namespace {

constexpr const char* kTraceFormat = "sign-posterior-trace";

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw InputError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(where + ": key '" + key + "' has the wrong type");
  }
}

void apply_mcmc(const json& j, McmcConfig& m, const std::string& where) {
  reject_unknown(j, {"n_iter", "burn_frac", "thin"}, where);
  read_opt(j, "n_iter", m.n_iter, where);
  read_opt(j, "burn_frac", m.burn_frac, where);
  read_opt(j, "thin", m.thin, where);
}

json stats_to_json(const CovariateStats& s) {
  json cont = json::array();
  for (const auto& c : s.cont) cont.push_back({c.count, c.sum, c.sum_sq});
  json cat = json::array();
  for (const auto& c : s.cat) cat.push_back(c.counts);
  return {{"cont", cont}, {"cat", cat}};
}

CovariateStats stats_from_json(const json& j, const Schema& schema) {
  CovariateStats s = CovariateStats::empty(schema);
  const auto& cont = j.at("cont");
  const auto& cat = j.at("cat");
  if (cont.size() != s.cont.size() || cat.size() != s.cat.size()) throw InputError("trace statistics do not match schema");
  for (std::size_t k = 0; k < s.cont.size(); ++k) {
    s.cont[k].count = cont[k].at(0).get<long>();
    s.cont[k].sum = cont[k].at(1).get<double>();
    s.cont[k].sum_sq = cont[k].at(2).get<double>();
  }
  for (std::size_t k = 0; k < s.cat.size(); ++k) {
    auto counts = cat[k].get<std::vector<long>>();
    if (counts.size() != s.cat[k].counts.size()) throw InputError("trace category counts do not match schema");
    s.cat[k].counts = counts;
    s.cat[k].total = 0;
    for (long c : counts) s.cat[k].total += c;
  }
  return s;
}

json hyper_to_json(const Hyperparams& h) {
  return {{"alpha", h.py.alpha},
          {"discount", h.py.discount},
          {"tau_beta", h.tau_beta},
          {"mu0", h.similarity.mu0},
          {"v0", h.similarity.v0},
          {"a_lambda", h.similarity.a_lambda},
          {"b_lambda", h.similarity.b_lambda},
          {"a_pi", h.similarity.a_pi},
          {"probit", h.terms.probit},
          {"covariates", h.terms.covariates}};
}

void apply_hyper(const json& j, Hyperparams& h, const std::string& where) {
  reject_unknown(j, {"alpha", "discount", "tau_beta", "mu0", "v0", "a_lambda", "b_lambda", "a_pi", "probit", "covariates"},
                 where);
  read_opt(j, "alpha", h.py.alpha, where);
  read_opt(j, "discount", h.py.discount, where);
  read_opt(j, "tau_beta", h.tau_beta, where);
  read_opt(j, "mu0", h.similarity.mu0, where);
  read_opt(j, "v0", h.similarity.v0, where);
  read_opt(j, "a_lambda", h.similarity.a_lambda, where);
  read_opt(j, "b_lambda", h.similarity.b_lambda, where);
  read_opt(j, "a_pi", h.similarity.a_pi, where);
  read_opt(j, "probit", h.terms.probit, where);
  read_opt(j, "covariates", h.terms.covariates, where);
}

}  // namespace

json schema_to_json(const Schema& schema) {
  json cat = json::array();
  for (const auto& c : schema.categorical) cat.push_back({{"name", c.name}, {"levels", c.levels}});
  return {{"response", schema.response}, {"continuous", schema.continuous}, {"categorical", cat}};
}

Schema schema_from_json(const json& j) {
  const std::string where = "schema";
  reject_unknown(j, {"response", "continuous", "categorical"}, where);
  Schema s;
  read_opt(j, "response", s.response, where);
  read_opt(j, "continuous", s.continuous, where);
  if (j.contains("categorical")) {
    for (const auto& c : j.at("categorical")) {
      reject_unknown(c, {"name", "levels"}, "schema categorical column");
      CategoricalColumn col;
      read_opt(c, "name", col.name, where);
      read_opt(c, "levels", col.levels, where);
      s.categorical.push_back(col);
    }
  }
  try {
    s.validate();
  } catch (const UsageError& e) {
    throw InputError(std::string("schema: ") + e.what());
  }
  return s;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

Schema load_schema(const std::string& path) { return schema_from_json(load_json(path)); }

void apply_config(const json& j, FitSettings& settings) {
  const std::string where = "config";
  reject_unknown(j, {"max_items_per_shard", "workers", "seed", "progress", "mcmc", "step_mcmc", "hyper", "standardize"},
                 where);
  read_opt(j, "max_items_per_shard", settings.sign.max_items_per_shard, where);
  read_opt(j, "workers", settings.sign.workers, where);
  read_opt(j, "seed", settings.sign.master_seed, where);
  read_opt(j, "progress", settings.sign.progress, where);
  read_opt(j, "standardize", settings.standardize, where);
  if (j.contains("mcmc")) apply_mcmc(j.at("mcmc"), settings.sign.mcmc, "config.mcmc");
  if (j.contains("step_mcmc")) {
    settings.sign.step_mcmc.clear();
    for (const auto& s : j.at("step_mcmc")) {
      McmcConfig m = settings.sign.mcmc;
      apply_mcmc(s, m, "config.step_mcmc");
      settings.sign.step_mcmc.push_back(m);
    }
  }
  if (j.contains("hyper")) apply_hyper(j.at("hyper"), settings.hyper, "config.hyper");
}

Standardization Standardization::fit(const Dataset& data) {
  const int p = data.schema().num_continuous();
  Standardization s{std::vector<double>(static_cast<std::size_t>(p), 0.0), std::vector<double>(static_cast<std::size_t>(p), 1.0)};
  if (data.size() < 2) return s;
  const double n = static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto w = data.continuous_row(i);
    for (int j = 0; j < p; ++j) s.mean[static_cast<std::size_t>(j)] += w[static_cast<std::size_t>(j)] / n;
  }
  std::vector<double> ss(static_cast<std::size_t>(p), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto w = data.continuous_row(i);
    for (std::size_t j = 0; j < ss.size(); ++j) ss[j] += (w[j] - s.mean[j]) * (w[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < ss.size(); ++j) {
    const double sd = std::sqrt(ss[j] / (n - 1.0));
    s.sd[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Dataset Standardization::apply(const Dataset& data) const {
  Dataset out(data.schema());
  std::vector<double> w(mean.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto src = data.continuous_row(i);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = (src[j] - mean[j]) / sd[j];
    out.push_back(data.outcome(i), w, data.categorical_row(i));
  }
  return out;
}

std::vector<std::uint8_t> encode_model(const ModelFile& model) {
  const auto& t = model.trace;
  json draws = json::array();
  for (const auto& d : t.draws) {
    json clusters = json::array();
    for (const auto& c : d.clusters) {
      clusters.push_back({{"size", c.size},
                          {"beta", std::vector<double>(c.beta.data(), c.beta.data() + c.beta.size())},
                          {"stats", stats_to_json(c.stats)}});
    }
    draws.push_back({{"clusters", clusters}});
  }
  json j = {{"format", kTraceFormat},
            {"version", kTraceVersion},
            {"schema", schema_to_json(t.schema)},
            {"hyper", hyper_to_json(t.hyper)},
            {"num_observations", t.num_observations},
            {"draws", draws}};
  if (model.standardization) {
    j["standardization"] = {{"mean", model.standardization->mean}, {"sd", model.standardization->sd}};
  } else {
    j["standardization"] = nullptr;
  }
  return json::to_cbor(j);
}

ModelFile decode_model(const std::vector<std::uint8_t>& bytes) {
  json j;
  try {
    j = json::from_cbor(bytes);
  } catch (const json::exception& e) {
    throw InputError(std::string("model file is not a valid trace container: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != kTraceFormat) throw InputError("model file has an unknown format tag");
    const int version = j.at("version").get<int>();
    if (version != kTraceVersion) throw InputError("unsupported model file version " + std::to_string(version));
    ModelFile m;
    m.trace.schema = schema_from_json(j.at("schema"));
    m.trace.hyper = Hyperparams::defaults(m.trace.schema);
    apply_hyper(j.at("hyper"), m.trace.hyper, "model hyperparameters");
    m.trace.num_observations = j.at("num_observations").get<long>();
    for (const auto& d : j.at("draws")) {
      TraceDraw draw;
      for (const auto& c : d.at("clusters")) {
        ClusterDraw cd;
        cd.size = c.at("size").get<int>();
        const auto beta = c.at("beta").get<std::vector<double>>();
        cd.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
        cd.stats = stats_from_json(c.at("stats"), m.trace.schema);
        draw.clusters.push_back(std::move(cd));
      }
      m.trace.draws.push_back(std::move(draw));
    }
    if (!j.at("standardization").is_null()) {
      const auto& s = j.at("standardization");
      m.standardization = Standardization{s.at("mean").get<std::vector<double>>(), s.at("sd").get<std::vector<double>>()};
    }
    m.trace.validate();
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("model file is malformed: ") + e.what());
  } catch (const UsageError& e) {
    throw InputError(std::string("model file is malformed: ") + e.what());
  } catch (const StateError& e) {
    throw InputError(std::string("model file is malformed: ") + e.what());
  }
}

void save_model(const std::string& path, const ModelFile& model) {
  const auto bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace sign::cli
