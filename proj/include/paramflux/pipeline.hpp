#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "paramflux/serialize.hpp"

namespace paramflux {

enum class PipelineMode { Piecewise, Continuous };

struct DataSource {
  std::optional<std::filesystem::path> csv;  // otherwise simulate the truth
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SparseSettings {
  SparseConfig config;
  std::vector<Atom> dictionary;
};

struct PipelineConfig {
  PipelineMode mode = PipelineMode::Piecewise;
  Json model_block;  // as given, echoed into results for replay
  ModelSpec model = ModelSpec::ode("empty", {"x"}, {"p"}, {"p"});
  std::optional<ParamSchedule> truth;
  std::vector<double> x0;
  std::vector<double> tgrid;
  IntegratorChoice generator{Method::Rk4, 10};
  DataSource data;
  DetectConfig detect;
  FitConfig fit;
  std::optional<SparseSettings> sparse;
  std::string result_name = "result.json";
  std::string plot_dir = "plots";
  Json echo;
};

/// Parses a pipeline config. Relative CSV paths resolve against `base_dir`.
/// Builtin models supply truth, x0, time grid and generator unless overridden.
PipelineConfig pipeline_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Config for a builtin model name with default blocks.
PipelineConfig default_pipeline_config(const std::string& model_name);

/// Data for the config: the CSV, or the truth simulated on the grid plus
/// optional white noise.
TimeSeries load_data(const PipelineConfig& cfg);

struct PipelineResult {
  TimeSeries data;
  TimeSeries model_traj;
  SwitchSet switches;
  std::vector<std::size_t> boundaries;  // segment or interval boundaries
  ParamSchedule estimate = ParamSchedule::constant(0.0, 1.0, {});
  std::vector<double> static_values;
  std::optional<IntervalSamples> samples;      // continuous mode
  std::vector<std::optional<SparseFit>> curves;  // continuous mode, per parameter
  std::optional<ParamSchedule> interval_schedule;  // continuous mode: step schedule of the samples
  std::optional<MetricsReport> metrics;
  std::optional<double> interval_e_p_grid;  // E_p of interval_schedule
  int evals = 0;
  double seconds = 0.0;
};

PipelineResult run_pipeline(const PipelineConfig& cfg, const TimeSeries& data);
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// Result document: switches, schedule, metrics, config echo, evaluation
/// counts and what `replay_model` needs. `data_csv` is stored verbatim.
Json result_to_json(const PipelineConfig& cfg, const PipelineResult& result,
                    const std::string& data_csv);

/// Model trajectory rebuilt from a result document and its data.
TimeSeries replay_model(const Json& result, const TimeSeries& data);

/// Writes result JSON, data CSV and plot files under `out_dir`.
void write_pipeline_outputs(const PipelineConfig& cfg, const PipelineResult& result,
                            const std::filesystem::path& out_dir);

struct NoiseCell {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
  double e_p = 0.0;  // segment mode when defined, else grid mode
};

struct NoiseRow {
  double sigma = 0.0;
  std::size_t runs = 0;
  double h_s_mean = 0.0, h_s_std = 0.0;
  double e_p_mean = 0.0, e_p_std = 0.0;
  double e_t_mean = 0.0, e_t_std = 0.0;
};

struct NoiseStudyResult {
  std::vector<NoiseCell> cells;  // sigma-major, seeds in the given order
  std::vector<NoiseRow> rows;
};

/// Runs the piecewise pipeline for every (sigma, seed) on `threads` workers.
/// Output is independent of the thread count.
NoiseStudyResult noise_study(const PipelineConfig& cfg, const std::vector<double>& sigmas,
                             const std::vector<std::uint64_t>& seeds, unsigned threads);

void write_noise_study(const NoiseStudyResult& study, const std::filesystem::path& out_dir);

}  // namespace paramflux
