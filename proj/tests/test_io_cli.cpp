#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "paramflux/error.hpp"
#include "paramflux/io.hpp"
#include "paramflux/pipeline.hpp"
#include "paramflux/registry.hpp"

using namespace paramflux;
namespace fs = std::filesystem;
using Catch::Approx;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("paramflux_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small, quick noise-study config on the gene model.
PipelineConfig quick_gene_config() {
  auto cfg = load_pipeline_config(fs::path(PARAMFLUX_CONFIG_DIR) / "gene_noise.json");
  cfg.fit.max_evals = 3000;
  return cfg;
}

int run_cli(const std::string& args, const fs::path& err_file) {
  const std::string cmd = std::string(PARAMFLUX_CLI) + " " + args + " > /dev/null 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("read a small CSV", "[io]") {
  std::istringstream in("t,m,p\n0,1,2\n0.5,1.5,2.5\n1,2,3\n");
  const auto ts = read_csv(in);
  CHECK(ts.states() == 2);
  CHECK(ts.samples() == 3);
  CHECK(ts.names == std::vector<std::string>{"m", "p"});
  CHECK(ts.X(1, 2) == 3.0);
  CHECK(ts.t[1] == 0.5);
}

TEST_CASE("CSV errors", "[io]") {
  std::istringstream dup("t,x\n0,1\n0.5,2\n0.5,3\n");
  try {
    read_csv(dup);
    FAIL("expected non_monotone_time");
  } catch (const Error& e) {
    CHECK(e.kind() == "non_monotone_time");
  }
  std::istringstream bad("t,x\n0,1\n0.5,abc\n");
  try {
    read_csv(bad, "bad.csv");
    FAIL("expected csv_parse");
  } catch (const Error& e) {
    CHECK(e.kind() == "csv_parse");
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }
  std::istringstream ragged("t,x,y\n0,1\n");
  CHECK_THROWS_AS(read_csv(ragged), Error);
  CHECK_THROWS_AS(load_csv("/nonexistent/data.csv"), Error);
}

TEST_CASE("CSV round trip keeps 15 significant digits", "[io][property]") {
  const auto sys = builtin_model("pvts");
  auto data = add_white_noise(generate_data(sys), 0.3, 1);
  data.names = {"x", "y"};
  const fs::path dir = scratch_dir("csv");
  save_csv(dir / "d.csv", data);
  const auto back = load_csv(dir / "d.csv");
  REQUIRE(back.samples() == data.samples());
  CHECK(back.names == data.names);
  for (std::size_t j = 0; j < data.samples(); ++j) {
    REQUIRE(back.t[j] == Approx(data.t[j]).epsilon(1e-15));
    for (Eigen::Index i = 0; i < 2; ++i) {
      REQUIRE(back.X(i, static_cast<Eigen::Index>(j)) ==
              Approx(data.X(i, static_cast<Eigen::Index>(j))).epsilon(1e-15));
    }
  }
}

TEST_CASE("config errors", "[io]") {
  const auto kind_of = [](const Json& j) {
    try {
      pipeline_config_from_json(j);
    } catch (const Error& e) {
      return e.kind();
    }
    return std::string("none");
  };
  CHECK(kind_of(Json{{"model", "gene"}, {"data", {{"source", "simulate"}}}}) == "none");
  CHECK(kind_of(Json{{"model", "nope"}, {"data", {{"source", "simulate"}}}}) == "unknown_model");
  CHECK(kind_of(Json{{"model", "gene"}, {"data", {{"source", "simulate"}, {"csv", "x.csv"}}}}) ==
        "config_error");
  CHECK(kind_of(Json{{"model", "gene"}, {"mode", "continuous"}, {"data", {{"source", "simulate"}}}}) ==
        "config_error");
  CHECK(kind_of(Json{{"model", "gene"}, {"data", {{"source", "simulate"}}}, {"fit", {{"optimizer", 3}}}}) ==
        "config_error");
}

TEST_CASE("shipped configs parse", "[io]") {
  for (const char* name : {"pvts", "heat", "gene_nonuniform", "advdiff", "gene_noise"}) {
    INFO(name);
    CHECK_NOTHROW(load_pipeline_config(fs::path(PARAMFLUX_CONFIG_DIR) / (std::string(name) + ".json")));
  }
}

TEST_CASE("result documents replay to the reported trajectory error", "[io][property]") {
  auto cfg = quick_gene_config();
  cfg.data.noise_sigma = 0.5;
  cfg.data.seed = 3;
  const auto data = load_data(cfg);
  const auto result = run_pipeline(cfg, data);
  REQUIRE(result.metrics.has_value());
  const Json doc = Json::parse(result_to_json(cfg, result, "data.csv").dump());
  const auto replayed = replay_model(doc, data);
  CHECK(std::abs(traj_error(data, replayed) - doc.at("metrics").at("E_t").get<double>()) <= 1e-12);

  // and through the files the CLI would write
  const fs::path dir = scratch_dir("replay");
  write_pipeline_outputs(cfg, result, dir);
  const auto disk = load_csv(dir / "data.csv");
  const Json doc2 = Json::parse(slurp(dir / "result.json"));
  CHECK(std::abs(traj_error(disk, replay_model(doc2, disk)) - result.metrics->e_t) <= 1e-12);
  CHECK(fs::exists(dir / "plots" / "trajectory.svg"));
  CHECK(fs::exists(dir / "plots" / "params.csv"));
}

TEST_CASE("noise study is deterministic and thread-count independent", "[io][property]") {
  const auto cfg = quick_gene_config();
  const std::vector<double> sigmas{0.0, 1.0};
  const std::vector<std::uint64_t> seeds{0, 1};
  const auto one = noise_study(cfg, sigmas, seeds, 1);
  const auto three = noise_study(cfg, sigmas, seeds, 3);
  REQUIRE(one.cells.size() == 4);
  const fs::path a = scratch_dir("noise_a"), b = scratch_dir("noise_b");
  write_noise_study(one, a);
  write_noise_study(three, b);
  CHECK(slurp(a / "noise_summary.csv") == slurp(b / "noise_summary.csv"));
  CHECK(slurp(a / "noise_cells.csv") == slurp(b / "noise_cells.csv"));
  CHECK(!slurp(a / "noise_summary.csv").empty());
}

TEST_CASE("a zero-noise study equals the clean run", "[io]") {
  const auto cfg = quick_gene_config();
  const auto study = noise_study(cfg, {0.0}, {0}, 1);
  auto clean_cfg = cfg;
  clean_cfg.data.noise_sigma = 0.0;
  const auto clean = run_pipeline(clean_cfg);
  REQUIRE(study.cells.size() == 1);
  REQUIRE(clean.metrics.has_value());
  const auto& m = study.cells[0].metrics;
  CHECK(m.e_t == clean.metrics->e_t);
  CHECK(m.e_p_grid == clean.metrics->e_p_grid);
  CHECK(m.h_s.value == clean.metrics->h_s.value);
  CHECK(m.e_ns == clean.metrics->e_ns);
}

TEST_CASE("cli exit codes and error documents", "[cli]") {
  const fs::path dir = scratch_dir("cli");
  const fs::path err = dir / "stderr.txt";
  CHECK(run_cli("simulate --model gene --out " + (dir / "sim").string(), err) == 0);
  CHECK(fs::exists(dir / "sim" / "data.csv"));
  CHECK(slurp(err).empty());

  CHECK(run_cli("simulate --model no_such_model --out " + (dir / "bad").string(), err) == 1);
  const Json e = Json::parse(slurp(err));
  CHECK(e.at("error") == "unknown_model");
  CHECK(e.contains("message"));

  CHECK(run_cli("detect --model gene --data /nonexistent.csv --out " + (dir / "bad").string(), err) == 1);
  CHECK(Json::parse(slurp(err)).contains("error"));
}
