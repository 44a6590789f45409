#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "csv.hpp"
#include "model_io.hpp"
#include "sign/synth.hpp"

using namespace sign;
using namespace sign::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sign_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(SIGN_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("CSV reader") {
  std::istringstream ok("id,z,w\n1,0,\"2.5\"\n\n2,1,-1e3\n");
  const auto t = read_csv(ok, "mem");
  CHECK(t.header == std::vector<std::string>{"id", "z", "w"});
  CHECK(t.rows.size() == 2);
  CHECK(t.line_numbers == std::vector<int>{2, 4});
  CHECK(t.rows[0][2] == "2.5");

  std::istringstream short_row("a,b\n1,2\n3\n");
  try {
    read_csv(short_row, "mem");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("mem:3") != std::string::npos);
  }
  std::istringstream empty("");
  CHECK_THROWS_AS(read_csv(empty, "mem"), InputError);
  CHECK_THROWS_AS(parse_double("", "f", 2, "w"), InputError);
  CHECK_THROWS_AS(parse_double("1.5x", "f", 2, "w"), InputError);
  CHECK_THROWS_AS(parse_double("nan", "f", 2, "w"), InputError);
  CHECK(parse_long("-12", "f", 2, "u") == -12);
}

TEST_CASE("trace container round-trips exactly") {
  const auto sim = gen_sim1(60, 81);
  SignConfig cfg;
  cfg.mcmc = McmcConfig{100, 0.5, 5, 0};
  cfg.max_items_per_shard = 100;
  cfg.progress = false;
  const auto report = run_sign(sim.data, Hyperparams::defaults(sim.data.schema()), cfg);
  ModelFile m{report.final_trace, Standardization{{0.1, 0.2, 0.3, 0.4, 0.5}, {1, 2, 3, 4, 5}}};
  const ModelFile back = decode_model(encode_model(m));
  CHECK(back.trace.schema == m.trace.schema);
  CHECK(back.trace.hyper == m.trace.hyper);
  CHECK(back.trace.num_observations == m.trace.num_observations);
  REQUIRE(back.trace.draws.size() == m.trace.draws.size());
  for (std::size_t t = 0; t < m.trace.draws.size(); ++t) {
    const auto& a = m.trace.draws[t].clusters;
    const auto& b = back.trace.draws[t].clusters;
    REQUIRE(a.size() == b.size());
    for (std::size_t c = 0; c < a.size(); ++c) {
      CHECK(a[c].size == b[c].size);
      CHECK(a[c].beta == b[c].beta);
      CHECK(a[c].stats == b[c].stats);
    }
  }
  CHECK(back.standardization->sd == m.standardization->sd);
  CHECK(encode_model(back) == encode_model(m));

  auto bytes = encode_model(m);
  bytes.resize(bytes.size() / 2);
  CHECK_THROWS_AS(decode_model(bytes), InputError);
}

TEST_CASE("config handling") {
  Schema s = sim_schema();
  FitSettings f;
  f.hyper = Hyperparams::defaults(s);
  apply_config(json::object(), f);
  CHECK(f.hyper.py.alpha == 1.0);
  CHECK(f.hyper.py.discount == 0.5);
  CHECK(f.hyper.tau_beta == 1.0);
  CHECK(f.hyper.similarity.v0 == 0.01);
  CHECK(f.hyper.similarity.a_pi == std::vector<double>(5, 1.0 / 3.0));
  CHECK(f.sign.mcmc.n_iter == 10000);
  CHECK(f.sign.mcmc.burn_frac == 0.5);
  CHECK(f.sign.mcmc.thin == 5);
  CHECK(f.sign.max_items_per_shard == 250);
  CHECK_FALSE(f.standardize);

  apply_config(json::parse(R"({"mcmc": {"n_iter": 400}, "hyper": {"alpha": 2.0}, "step_mcmc": [{"thin": 2}]})"), f);
  CHECK(f.sign.mcmc.n_iter == 400);
  CHECK(f.hyper.py.alpha == 2.0);
  REQUIRE(f.sign.step_mcmc.size() == 1);
  CHECK(f.sign.step_mcmc[0].n_iter == 400);
  CHECK(f.sign.step_mcmc[0].thin == 2);
  CHECK_THROWS_AS(apply_config(json::parse(R"({"iters": 5})"), f), InputError);
  CHECK_THROWS_AS(apply_config(json::parse(R"({"mcmc": {"n_iter": "many"}})"), f), InputError);

  CHECK(schema_from_json(schema_to_json(s)) == s);
  CHECK_THROWS_AS(schema_from_json(json::parse(R"({"continuous": ["a", "a"]})")), InputError);
  CHECK_THROWS_AS(schema_from_json(json::parse(R"({"categorical": [{"name": "u", "levels": 1}]})")), InputError);
}

TEST_CASE("standardization") {
  const auto sim = gen_sim2(500, 82);
  const auto st = Standardization::fit(sim);
  const Dataset z = st.apply(sim);
  for (int j = 0; j < 5; ++j) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < z.size(); ++i) m += z.continuous_row(i)[static_cast<std::size_t>(j)] / 500.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double dv = z.continuous_row(i)[static_cast<std::size_t>(j)] - m;
      v += dv * dv / 499.0;
    }
    CHECK(std::abs(m) < 1e-12);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("end-to-end command line round trip") {
  TempDir dir;
  REQUIRE(run("simulate sim1 --n 100 --seed 3 --out " + (dir / "train.csv") + " --schema " + (dir / "schema.json") +
              " --truth " + (dir / "truth.csv")) == 0);
  REQUIRE(run("simulate sim1 --n 50 --seed 4 --out " + (dir / "test.csv")) == 0);
  const std::string fit = "fit " + (dir / "train.csv") + " " + (dir / "schema.json") +
                          " --iters 200 --seed 7 --max-items-per-shard 60 --workers 2 --quiet --out-dir ";
  REQUIRE(run(fit + (dir / "a")) == 0);
  REQUIRE(run(fit + (dir / "b")) == 0);
  CHECK(slurp(dir / "a/partition.csv") == slurp(dir / "b/partition.csv"));
  CHECK(slurp(dir / "a/model.trace") == slurp(dir / "b/model.trace"));

  const auto report = load_json(dir / "a/report.json");
  CHECK(report.at("num_steps").get<int>() >= 2);
  CHECK(report.at("steps").back().at("final").get<bool>());
  CHECK(report.at("steps").at(0).at("shards").get<int>() == 2);
  CHECK(report.at("seed").get<int>() == 7);
  const auto part = read_csv_file(dir / "a/partition.csv");
  CHECK(part.header == std::vector<std::string>{"observation_id", "label"});
  CHECK(part.rows.size() == 100);
  CHECK_NOTHROW(load_model(dir / "a/model.trace"));

  REQUIRE(run("predict " + (dir / "a/model.trace") + " " + (dir / "test.csv") + " --out " + (dir / "pred.csv")) == 0);
  const auto pred = read_csv_file(dir / "pred.csv");
  CHECK(pred.header == std::vector<std::string>{"id", "probability"});
  REQUIRE(pred.rows.size() == 50);
  for (std::size_t r = 0; r < pred.rows.size(); ++r) {
    const double p = parse_double(pred.rows[r][1], "pred", pred.line_numbers[r], "probability");
    CHECK((p > 0.0 && p < 1.0));
  }
  REQUIRE(run("eval " + (dir / "pred.csv") + " " + (dir / "test.csv") + " --out " + (dir / "metrics.json")) == 0);
  const auto metrics = load_json(dir / "metrics.json");
  CHECK(metrics.at("n_pos").get<int>() + metrics.at("n_neg").get<int>() == 50);
  const double a = metrics.at("auc").get<double>();
  CHECK((a >= 0.0 && a <= 1.0));

  // Standardized fits store their transform and predict through it.
  REQUIRE(run(fit + (dir / "s") + " --standardize") == 0);
  CHECK(load_model(dir / "s/model.trace").standardization.has_value());
  REQUIRE(run("predict " + (dir / "s/model.trace") + " " + (dir / "test.csv") + " --out " + (dir / "pred_s.csv")) == 0);

  // Empty test file: header only.
  write_file(dir / "empty.csv", "id,w1,w2,w3,w4,w5,u1,u2,u3,u4,u5\n");
  REQUIRE(run("predict " + (dir / "a/model.trace") + " " + (dir / "empty.csv") + " --out " + (dir / "pe.csv")) == 0);
  CHECK(slurp(dir / "pe.csv") == "id,probability\n");

  // Duplicate rows give identical probabilities.
  write_file(dir / "dup.csv", "w1,w2,w3,w4,w5,u1,u2,u3,u4,u5\n0.5,1,0,0,0,1,2,3,1,2\n0.5,1,0,0,0,1,2,3,1,2\n");
  REQUIRE(run("predict " + (dir / "a/model.trace") + " " + (dir / "dup.csv") + " --out " + (dir / "pd.csv")) == 0);
  const auto pd = read_csv_file(dir / "pd.csv");
  CHECK(pd.rows[0][1] == pd.rows[1][1]);

  // Errors: unknown category and missing fields are runtime errors, usage problems exit 2.
  write_file(dir / "badcat.csv", "w1,w2,w3,w4,w5,u1,u2,u3,u4,u5\n0,0,0,0,0,1,2,4,1,2\n");
  CHECK(run("predict " + (dir / "a/model.trace") + " " + (dir / "badcat.csv") + " --out " + (dir / "x.csv")) == 1);
  write_file(dir / "short.csv", "id,z,w1,w2,w3,w4,w5,u1,u2,u3,u4,u5\n0,1,0,0,0,0,0,1,1,1,1\n");
  CHECK(run("fit " + (dir / "short.csv") + " " + (dir / "schema.json") + " --quiet --out-dir " + (dir / "c")) == 1);
  write_file(dir / "nocol.csv", "id,z,w1,w2,w3,w4,u1,u2,u3,u4,u5\n0,1,0,0,0,0,1,1,1,1,1\n");
  CHECK(run("fit " + (dir / "nocol.csv") + " " + (dir / "schema.json") + " --quiet --out-dir " + (dir / "c")) == 1);
  write_file(dir / "onecls.csv", "id,z\n0,1\n1,1\n");
  write_file(dir / "onepred.csv", "id,probability\n0,0.3\n1,0.4\n");
  CHECK(run("eval " + (dir / "onepred.csv") + " " + (dir / "onecls.csv") + " --out " + (dir / "m.json")) == 2);
  CHECK(run("fit") == 2);
  CHECK(run("bogus") == 2);
  CHECK(run("simulate sim3 --out " + (dir / "x.csv")) == 2);
  CHECK(run("fit " + (dir / "train.csv") + " " + (dir / "schema.json") + " --iters 0 --quiet --out-dir " + (dir / "c")) == 2);
}

TEST_CASE("dataset loader reports the offending line and column") {
  TempDir dir;
  write_file(dir / "d.csv", "z,w1,u1\n1,0.5,2\n0,abc,1\n");
  Schema s;
  s.continuous = {"w1"};
  s.categorical = {{"u1", 2}};
  try {
    load_dataset(dir / "d.csv", s, true);
    FAIL("expected an error");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":3:") != std::string::npos);
    CHECK(msg.find("w1") != std::string::npos);
  }
  write_file(dir / "d2.csv", "z,w1\n1,0.5\n");
  try {
    load_dataset(dir / "d2.csv", s, true);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("u1") != std::string::npos);
  }
}
