// Command-line front end: simulate, detect, fit, sparse-fit, pipeline,
// noise-study and metrics over JSON configs and CSV data.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "paramflux/error.hpp"
#include "paramflux/io.hpp"
#include "paramflux/pipeline.hpp"
#include "paramflux/registry.hpp"

namespace fs = std::filesystem;
using namespace paramflux;

namespace {

struct Common {
  std::string config;
  std::string model;
  std::string out = "out";
  std::string data;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Pipeline config (JSON)");
  cmd->add_option("--model", c.model, "Builtin model name or config path");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--data", c.data, "Data CSV, overriding the config's data source");
  cmd->add_option("--seed", c.seed, "Noise seed");
  cmd->add_option("--threads", c.threads, "Worker threads (default: PARAMFLUX_THREADS or all cores)");
  cmd->add_flag("--verbose", c.verbose, "Progress on stderr");
}

PipelineConfig resolve_config(const Common& c) {
  PipelineConfig cfg;
  if (!c.config.empty()) {
    cfg = load_pipeline_config(c.config);
  } else if (!c.model.empty()) {
    cfg = fs::exists(c.model) ? load_pipeline_config(c.model) : default_pipeline_config(c.model);
  } else {
    throw InvalidArgument("config_error", "pass --config or --model");
  }
  if (!c.data.empty()) cfg.data.csv = fs::path(c.data);
  if (c.seed) cfg.data.seed = *c.seed;
  return cfg;
}

unsigned resolve_threads(const Common& c) {
  if (c.threads && *c.threads > 0) return *c.threads;
  if (const char* env = std::getenv("PARAMFLUX_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw InvalidArgument("config_error", std::string("PARAMFLUX_THREADS is not a positive integer: ") + env);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void log(const Common& c, const std::string& msg) {
  if (c.verbose) std::cerr << "[paramflux] " << msg << '\n';
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("io_error", "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config_error", path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("io_error", "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int cmd_simulate(const Common& c, const std::string& replay, double noise) {
  if (!replay.empty()) {
    const fs::path result_path = replay;
    const Json result = read_json(result_path);
    const fs::path data_path = result_path.parent_path() / result.at("data_csv").get<std::string>();
    const TimeSeries data = load_csv(data_path);
    const TimeSeries model = replay_model(result, data);
    fs::create_directories(c.out);
    save_csv(fs::path(c.out) / "model.csv", model);
    Json out = {{"E_t", traj_error(data, model)}};
    if (result.contains("metrics") && result.at("metrics").is_object()) {
      out["reported_E_t"] = result.at("metrics").at("E_t");
    }
    std::cout << out.dump() << '\n';
    return 0;
  }
  PipelineConfig cfg = resolve_config(c);
  if (noise >= 0.0) cfg.data.noise_sigma = noise;
  const TimeSeries data = load_data(cfg);
  fs::create_directories(c.out);
  save_csv(fs::path(c.out) / "data.csv", data);
  log(c, "wrote " + (fs::path(c.out) / "data.csv").string());
  std::cout << Json{{"states", data.states()}, {"samples", data.samples()}}.dump() << '\n';
  return 0;
}

int cmd_detect(const Common& c) {
  const PipelineConfig cfg = resolve_config(c);
  const TimeSeries data = load_data(cfg);
  const SwitchSet sw = detect_switches(data, cfg.detect);
  const Json out = to_json(sw);
  fs::create_directories(c.out);
  write_json(fs::path(c.out) / "switches.json", out);
  std::cout << out.dump() << '\n';
  return 0;
}

int run_and_write(const Common& c, PipelineConfig cfg) {
  log(c, "running " + std::string(cfg.mode == PipelineMode::Piecewise ? "piecewise" : "continuous") +
             " pipeline on " + cfg.model.name());
  const PipelineResult r = run_pipeline(cfg);
  write_pipeline_outputs(cfg, r, c.out);
  log(c, "done in " + std::to_string(r.seconds) + " s, " + std::to_string(r.evals) + " evaluations");
  Json summary = {{"result", (fs::path(c.out) / cfg.result_name).string()},
                  {"switch_times", r.switches.times},
                  {"metrics", r.metrics ? to_json(*r.metrics) : Json(nullptr)}};
  if (cfg.mode == PipelineMode::Continuous) {
    Json ex = Json::object();
    for (std::size_t j = 0; j < r.curves.size(); ++j) {
      if (r.curves[j]) ex[cfg.model.params()[j]] = r.curves[j]->to_string();
    }
    summary["expressions"] = ex;
  }
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_fit(const Common& c, const std::vector<std::size_t>& switches) {
  PipelineConfig cfg = resolve_config(c);
  cfg.mode = PipelineMode::Piecewise;
  if (switches.empty()) return run_and_write(c, cfg);

  const TimeSeries data = load_data(cfg);
  const SwitchSet sw = make_switch_set(data.t, switches);
  const FitResult fit = fit_piecewise(cfg.model, data, sw, cfg.fit);
  Json out = {{"switch_indices", sw.indices},
              {"switch_times", sw.times},
              {"boundaries", fit.boundaries},
              {"schedule", to_json(fit.schedule)},
              {"static_values", fit.static_values},
              {"E_t", fit.objective},
              {"per_segment_objective", fit.per_segment_objective},
              {"evals", fit.evals}};
  fs::create_directories(c.out);
  write_json(fs::path(c.out) / "fit.json", out);
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_sparse_fit(const Common& c, std::optional<double> lambda) {
  PipelineConfig cfg = resolve_config(c);
  cfg.mode = PipelineMode::Continuous;
  if (!cfg.sparse) cfg.sparse = SparseSettings{SparseConfig{}, default_dictionary()};
  if (lambda) cfg.sparse->config.lambda = *lambda;
  return run_and_write(c, cfg);
}

int cmd_noise_study(const Common& c, std::vector<double> sigmas, std::vector<std::uint64_t> seeds,
                    std::optional<std::size_t> seed_count) {
  const PipelineConfig cfg = resolve_config(c);
  const Json block = cfg.echo.value("noise_study", Json::object());
  if (sigmas.empty()) sigmas = block.value("sigmas", std::vector<double>{0.0, 0.75, 1.25, 2.25});
  if (seed_count) {
    seeds.clear();
    for (std::size_t k = 0; k < *seed_count; ++k) seeds.push_back(k);
  }
  if (seeds.empty()) seeds = block.value("seeds", std::vector<std::uint64_t>{});
  if (seeds.empty()) {
    for (std::uint64_t k = 0; k < 10; ++k) seeds.push_back(k);
  }
  const unsigned threads = resolve_threads(c);
  log(c, std::to_string(sigmas.size() * seeds.size()) + " runs on " + std::to_string(threads) +
             " threads");
  const NoiseStudyResult study = noise_study(cfg, sigmas, seeds, threads);
  write_noise_study(study, c.out);
  Json rows = Json::array();
  for (const auto& r : study.rows) {
    rows.push_back({{"sigma", r.sigma},
                    {"runs", r.runs},
                    {"H_s_mean", r.h_s_mean},
                    {"H_s_std", r.h_s_std},
                    {"E_p_mean", r.e_p_mean},
                    {"E_p_std", r.e_p_std},
                    {"E_t_mean", r.e_t_mean},
                    {"E_t_std", r.e_t_std}});
  }
  std::cout << rows.dump() << '\n';
  return 0;
}

int cmd_metrics(const Common& c, const std::string& result_file) {
  const fs::path result_path = result_file;
  const Json result = read_json(result_path);
  const fs::path data_path = result_path.parent_path() / result.at("data_csv").get<std::string>();
  const TimeSeries data = load_csv(data_path);
  const TimeSeries model = replay_model(result, data);
  const ModelSpec spec = model_from_json(result.at("model"));
  const ParamSchedule est = schedule_from_json(result.at("schedule"));

  std::optional<ParamSchedule> truth;
  if (!c.config.empty() || !c.model.empty()) {
    truth = resolve_config(c).truth;
  } else if (result.contains("config_echo")) {
    truth = pipeline_config_from_json(result.at("config_echo"), result_path.parent_path()).truth;
  }
  const auto times = result.value("switch_times", std::vector<double>{});
  Json out;
  if (truth) {
    out = to_json(evaluate_metrics(*truth, est, data, model, times, spec.static_mask()));
  } else {
    out = {{"E_t", traj_error(data, model)}, {"N_s_detected", times.size()}};
  }
  std::cout << out.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter switch detection and identification for dynamical systems"};
  app.require_subcommand(1);
  Common common;

  auto* sim = app.add_subcommand("simulate", "Generate data from a model's true schedule, or replay a result");
  add_common(sim, common);
  std::string replay;
  double noise = -1.0;
  sim->add_option("--replay", replay, "Result JSON to replay through the integrator");
  sim->add_option("--noise", noise, "White-noise sigma (overrides the config)");

  auto* det = app.add_subcommand("detect", "Detect parameter switches");
  add_common(det, common);

  auto* fit = app.add_subcommand("fit", "Fit piecewise-constant parameters");
  add_common(fit, common);
  std::vector<std::size_t> switches;
  fit->add_option("--switches", switches, "Switch indices (skip detection)")->delimiter(',');

  auto* sparse = app.add_subcommand("sparse-fit", "Recover continuously varying parameters");
  add_common(sparse, common);
  std::optional<double> lambda;
  sparse->add_option("--lambda", lambda, "Sparsity weight");

  auto* pipe = app.add_subcommand("pipeline", "Run the configured pipeline end to end");
  add_common(pipe, common);

  auto* noise_cmd = app.add_subcommand("noise-study", "Metrics across noise levels and seeds");
  add_common(noise_cmd, common);
  std::vector<double> sigmas;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> seed_count;
  noise_cmd->add_option("--sigmas", sigmas, "Noise levels")->delimiter(',');
  noise_cmd->add_option("--seeds", seeds, "Seed list")->delimiter(',');
  noise_cmd->add_option("--seed-count", seed_count, "Use seeds 0..N-1");

  auto* met = app.add_subcommand("metrics", "Recompute metrics for a result file");
  add_common(met, common);
  std::string result_file;
  met->add_option("--result", result_file, "Result JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(common, replay, noise);
    if (*det) return cmd_detect(common);
    if (*fit) return cmd_fit(common, switches);
    if (*sparse) return cmd_sparse_fit(common, lambda);
    if (*pipe) return run_and_write(common, resolve_config(common));
    if (*noise_cmd) return cmd_noise_study(common, sigmas, seeds, seed_count);
    if (*met) return cmd_metrics(common, result_file);
  } catch (const Error& e) {
    std::cerr << Json{{"error", e.kind()}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << Json{{"error", "config_error"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
