#include "paramflux/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

#include "paramflux/error.hpp"
#include "paramflux/io.hpp"
#include "paramflux/plot.hpp"
#include "paramflux/registry.hpp"

namespace paramflux {

namespace {

std::vector<double> first_column(const TimeSeries& data) {
  return {data.X.col(0).data(), data.X.col(0).data() + data.X.rows()};
}

template <class F>
auto config_guard(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config_error", e.what());
  }
}

std::string builtin_name_of(const Json& block) {
  if (block.is_string()) return block.get<std::string>();
  if (block.is_object() && block.contains("builtin")) return block.at("builtin").get<std::string>();
  return {};
}

}  // namespace

PipelineConfig pipeline_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  return config_guard([&] {
    PipelineConfig cfg;
    cfg.echo = j;
    const std::string mode = j.value("mode", std::string("piecewise"));
    if (mode == "piecewise") {
      cfg.mode = PipelineMode::Piecewise;
    } else if (mode == "continuous") {
      cfg.mode = PipelineMode::Continuous;
    } else {
      throw InvalidArgument("config_error", "unknown mode '" + mode + "' (valid: piecewise, continuous)");
    }

    if (!j.contains("model")) throw InvalidArgument("config_error", "config needs a model block");
    cfg.model_block = j.at("model");
    cfg.model = model_from_json(cfg.model_block);
    if (const auto name = builtin_name_of(cfg.model_block); !name.empty()) {
      BuiltinSystem sys = builtin_model(name);
      cfg.truth = sys.truth;
      cfg.x0 = sys.x0;
      cfg.tgrid = sys.tgrid;
      cfg.generator = sys.generator;
    }

    const Json data = j.value("data", Json::object());
    const bool has_csv = data.contains("csv");
    const bool simulate = data.value("source", std::string(has_csv ? "csv" : "simulate")) == "simulate";
    if (has_csv == simulate) {
      throw InvalidArgument("config_error", "data needs exactly one source: \"csv\" or \"simulate\"");
    }
    if (has_csv) {
      std::filesystem::path p = data.at("csv").get<std::string>();
      cfg.data.csv = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    cfg.data.noise_sigma = data.value("noise_sigma", 0.0);
    cfg.data.seed = data.value("seed", std::uint64_t{0});
    if (data.contains("schedule")) cfg.truth = schedule_from_json(data.at("schedule"));
    if (j.contains("truth")) cfg.truth = schedule_from_json(j.at("truth"));
    if (data.contains("x0")) cfg.x0 = data.at("x0").get<std::vector<double>>();
    if (data.contains("t")) cfg.tgrid = time_grid_from_json(data.at("t"));
    if (data.contains("integrator")) cfg.generator = integrator_from_json(data.at("integrator"));
    if (simulate && (!cfg.truth || cfg.x0.empty() || cfg.tgrid.empty())) {
      throw InvalidArgument("config_error", "simulated data needs a schedule, x0 and a time grid");
    }

    cfg.detect = detect_config_from_json(j.value("detect", Json::object()));
    cfg.fit = fit_config_from_json(j.value("fit", Json::object()));
    if (j.contains("sparse")) {
      const Json& s = j.at("sparse");
      cfg.sparse = SparseSettings{sparse_config_from_json(s),
                                  dictionary_from_json(s.value("dictionary", Json()))};
    }
    if (cfg.mode == PipelineMode::Continuous && !cfg.sparse) {
      throw InvalidArgument("config_error", "continuous mode needs a sparse block");
    }
    const Json outputs = j.value("outputs", Json::object());
    cfg.result_name = outputs.value("result", cfg.result_name);
    cfg.plot_dir = outputs.value("plot_dir", cfg.plot_dir);
    return cfg;
  });
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("io_error", "cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config_error", path.string() + ": " + e.what());
  }
  return pipeline_config_from_json(j, path.parent_path());
}

PipelineConfig default_pipeline_config(const std::string& model_name) {
  return pipeline_config_from_json(Json{{"model", model_name}});
}

TimeSeries load_data(const PipelineConfig& cfg) {
  TimeSeries data;
  if (cfg.data.csv) {
    data = load_csv(*cfg.data.csv);
    if (data.states() != cfg.model.state_count()) {
      throw InvalidArgument("shape_mismatch", "data has " + std::to_string(data.states()) +
                                                  " states, model expects " +
                                                  std::to_string(cfg.model.state_count()));
    }
  } else {
    data = simulate(cfg.model, *cfg.truth, cfg.x0, cfg.tgrid, cfg.generator);
  }
  if (data.names.empty()) data.names = cfg.model.states();
  return add_white_noise(data, cfg.data.noise_sigma, cfg.data.seed);
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const TimeSeries& data) {
  data.validate();
  const auto start = std::chrono::steady_clock::now();
  PipelineResult r;
  r.data = data;
  const ModelSpec& model = cfg.model;

  if (cfg.mode == PipelineMode::Piecewise) {
    r.switches = detect_switches(data, cfg.detect);
    FitResult fit = fit_piecewise(model, data, r.switches, cfg.fit);
    r.model_traj = reconstruct_segments(model, data, fit.boundaries, fit.segment_values,
                                        cfg.fit.integrator, cfg.fit.chain_segments);
    r.boundaries = fit.boundaries;
    r.estimate = fit.schedule;
    r.static_values = fit.static_values;
    r.evals = fit.evals;
  } else {
    IntervalSamples samples = sample_parameters(model, data, cfg.fit);
    std::vector<ParamTrack> tracks;
    std::size_t next_static = 0;
    r.curves.assign(model.param_count(), std::nullopt);
    for (std::size_t j = 0; j < model.param_count(); ++j) {
      if (model.static_mask()[j]) {
        tracks.emplace_back(samples.static_values.at(next_static++));
        continue;
      }
      SparseFit curve = sparse_fit(samples.midtimes, samples.param(j), cfg.sparse->dictionary,
                                   cfg.sparse->config);
      r.curves[j] = curve;
      tracks.emplace_back(std::move(curve));
    }
    r.estimate = ParamSchedule::mixed(data.t.front(), data.t.back(), std::move(tracks));
    r.model_traj = simulate(model, r.estimate, first_column(data), data.t, cfg.fit.integrator);
    r.model_traj.names = data.names;
    r.boundaries = samples.boundaries;
    r.static_values = samples.static_values;
    r.interval_schedule = samples.schedule;
    r.evals = samples.evals;
    r.samples = std::move(samples);
  }

  if (cfg.truth) {
    r.metrics = evaluate_metrics(*cfg.truth, r.estimate, data, r.model_traj, r.switches.times,
                                 model.static_mask());
    if (r.interval_schedule) {
      r.interval_e_p_grid = param_error(*cfg.truth, *r.interval_schedule, ParamErrorMode::Grid,
                                        data.t, model.static_mask());
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) { return run_pipeline(cfg, load_data(cfg)); }

Json result_to_json(const PipelineConfig& cfg, const PipelineResult& r, const std::string& data_csv) {
  Json out;
  out["mode"] = cfg.mode == PipelineMode::Piecewise ? "piecewise" : "continuous";
  out["model"] = cfg.model_block;
  const Json sw = to_json(r.switches);
  out["switch_indices"] = sw["switch_indices"];
  out["switch_times"] = sw["switch_times"];
  out["per_state_switches"] = sw["per_state"];
  out["boundaries"] = r.boundaries;
  out["schedule"] = to_json(r.estimate);
  out["static_values"] = r.static_values;
  out["metrics"] = r.metrics ? to_json(*r.metrics) : Json(nullptr);
  out["evals"] = r.evals;
  out["seconds"] = r.seconds;
  out["integrator"] = to_json(cfg.fit.integrator);
  out["chain_segments"] = cfg.fit.chain_segments;
  out["data_csv"] = data_csv;
  out["config_echo"] = cfg.echo;
  if (cfg.mode == PipelineMode::Continuous) {
    Json expressions = Json::object();
    for (std::size_t j = 0; j < r.curves.size(); ++j) {
      if (r.curves[j]) expressions[cfg.model.params()[j]] = r.curves[j]->to_string();
    }
    out["expressions"] = expressions;
    if (r.samples) {
      out["interval_samples"] = {{"midtimes", r.samples->midtimes}, {"values", r.samples->values}};
    }
    out["interval_E_p_grid"] = r.interval_e_p_grid ? Json(*r.interval_e_p_grid) : Json(nullptr);
  }
  return out;
}

TimeSeries replay_model(const Json& result, const TimeSeries& data) {
  return config_guard([&] {
    const ModelSpec model = model_from_json(result.at("model"));
    const ParamSchedule schedule = schedule_from_json(result.at("schedule"));
    const IntegratorChoice choice = integrator_from_json(result.at("integrator"));
    if (result.at("mode").get<std::string>() == "piecewise") {
      const auto* pw = std::get_if<PiecewiseValues>(&schedule.repr());
      if (!pw) throw InvalidArgument("config_error", "piecewise result needs a piecewise schedule");
      return reconstruct_segments(model, data, result.at("boundaries").get<std::vector<std::size_t>>(),
                                  pw->values, choice, result.value("chain_segments", false));
    }
    TimeSeries traj = simulate(model, schedule, first_column(data), data.t, choice);
    traj.names = data.names;
    return traj;
  });
}

void write_pipeline_outputs(const PipelineConfig& cfg, const PipelineResult& r,
                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path plots = out_dir / cfg.plot_dir;
  std::filesystem::create_directories(plots);
  save_csv(out_dir / "data.csv", r.data);
  {
    std::ofstream out(out_dir / cfg.result_name);
    if (!out) throw InvalidArgument("io_error", "cannot write " + (out_dir / cfg.result_name).string());
    out << result_to_json(cfg, r, "data.csv").dump(2) << '\n';
  }

  write_trajectory_csv(plots / "trajectory.csv", r.data, r.model_traj);
  write_param_csv(plots / "params.csv", r.data.t, cfg.model.params(), r.estimate, cfg.truth);

  std::vector<PlotSeries> traj;
  for (std::size_t i : plotted_states(r.data.states())) {
    const std::string name = i < r.data.names.size() ? r.data.names[i] : "x" + std::to_string(i + 1);
    traj.push_back({name + " data", r.data.t, r.data.row(i), false, {}});
    traj.push_back({name + " model", r.model_traj.t, r.model_traj.row(i), true, {}});
  }
  write_svg_chart(plots / "trajectory.svg", "Data vs model", "t", traj);

  std::vector<PlotSeries> params;
  for (std::size_t j = 0; j < cfg.model.param_count(); ++j) {
    PlotSeries est{cfg.model.params()[j] + " est", r.data.t, {}, false, {}};
    PlotSeries tru{cfg.model.params()[j] + " true", r.data.t, {}, true, {}};
    for (double t : r.data.t) {
      est.y.push_back(r.estimate.eval(t)[j]);
      if (cfg.truth) tru.y.push_back(cfg.truth->eval(t)[j]);
    }
    params.push_back(std::move(est));
    if (cfg.truth) params.push_back(std::move(tru));
  }
  write_svg_chart(plots / "params.svg", "Parameters", "t", params);

  if (r.samples) {
    std::ofstream out(plots / "samples.csv");
    out << "t";
    for (const auto& n : cfg.model.params()) out << ',' << n;
    out << '\n';
    char buf[32];
    for (std::size_t k = 0; k < r.samples->midtimes.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", r.samples->midtimes[k]);
      out << buf;
      for (double v : r.samples->values[k]) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

NoiseStudyResult noise_study(const PipelineConfig& cfg, const std::vector<double>& sigmas,
                             const std::vector<std::uint64_t>& seeds, unsigned threads) {
  if (sigmas.empty() || seeds.empty()) throw InvalidArgument("noise study needs sigmas and seeds");
  if (!cfg.truth) throw InvalidArgument("noise study needs a ground-truth schedule");
  if (cfg.mode != PipelineMode::Piecewise) throw InvalidArgument("noise study runs the piecewise pipeline");
  PipelineConfig clean_cfg = cfg;
  clean_cfg.data.noise_sigma = 0.0;
  const TimeSeries clean = load_data(clean_cfg);

  NoiseStudyResult study;
  for (double s : sigmas) {
    for (std::uint64_t seed : seeds) study.cells.push_back({s, seed, {}, 0.0});
  }
  std::vector<std::exception_ptr> errors(study.cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < study.cells.size(); i = next++) {
      NoiseCell& cell = study.cells[i];
      try {
        const PipelineResult r = run_pipeline(cfg, add_white_noise(clean, cell.sigma, cell.seed));
        cell.metrics = *r.metrics;
        cell.e_p = r.metrics->e_p_segment.value_or(r.metrics->e_p_grid);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(study.cells.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    std::vector<double> hs, ep, et;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const NoiseCell& c = study.cells[s * seeds.size() + k];
      hs.push_back(c.metrics.h_s.infinite ? std::numeric_limits<double>::infinity() : c.metrics.h_s.value);
      ep.push_back(c.e_p);
      et.push_back(c.metrics.e_t);
    }
    NoiseRow row;
    row.sigma = sigmas[s];
    row.runs = seeds.size();
    mean_std(hs, row.h_s_mean, row.h_s_std);
    mean_std(ep, row.e_p_mean, row.e_p_std);
    mean_std(et, row.e_t_mean, row.e_t_std);
    study.rows.push_back(row);
  }
  return study;
}

void write_noise_study(const NoiseStudyResult& study, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  char buf[256];
  {
    std::ofstream out(out_dir / "noise_summary.csv");
    if (!out) throw InvalidArgument("io_error", "cannot write " + (out_dir / "noise_summary.csv").string());
    out << "sigma,runs,H_s_mean,H_s_std,E_p_mean,E_p_std,E_t_mean,E_t_std\n";
    for (const auto& r : study.rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.sigma,
                    r.runs, r.h_s_mean, r.h_s_std, r.e_p_mean, r.e_p_std, r.e_t_mean, r.e_t_std);
      out << buf;
    }
  }
  {
    std::ofstream out(out_dir / "noise_cells.csv");
    out << "sigma,seed,H_s,E_p,E_t,E_Ns\n";
    for (const auto& c : study.cells) {
      std::snprintf(buf, sizeof buf, "%.17g,%llu,%.17g,%.17g,%.17g,%ld\n", c.sigma,
                    static_cast<unsigned long long>(c.seed), c.metrics.h_s.value, c.e_p,
                    c.metrics.e_t, c.metrics.e_ns);
      out << buf;
    }
  }
  PlotSeries hs{"H_s", {}, {}, false, {}}, ep{"E_p", {}, {}, false, {}}, et{"E_t", {}, {}, false, {}};
  for (const auto& r : study.rows) {
    for (auto* s : {&hs, &ep, &et}) s->x.push_back(r.sigma);
    hs.y.push_back(r.h_s_mean);
    hs.err.push_back(r.h_s_std);
    ep.y.push_back(r.e_p_mean);
    ep.err.push_back(r.e_p_std);
    et.y.push_back(r.e_t_mean);
    et.err.push_back(r.e_t_std);
  }
  write_svg_chart(out_dir / "noise_hausdorff.svg", "Hausdorff error vs noise", "sigma", {hs});
  write_svg_chart(out_dir / "noise_errors.svg", "Parameter and trajectory error vs noise", "sigma",
                  {ep, et});
}

}  // namespace paramflux
