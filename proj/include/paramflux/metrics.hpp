#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "paramflux/schedule.hpp"
#include "paramflux/timeseries.hpp"

namespace paramflux {

/// ||X_data - X_model||_F / N.
double traj_error(const TimeSeries& data, const TimeSeries& model);

enum class ParamErrorMode {
  Segment,  // stacked per-segment values, static parameters counted once
  Grid,     // both schedules evaluated on a time grid
};

/// E_p = ||p_true - p_est||_2 / n_p in the chosen mode. Segment mode needs two
/// piecewise schedules with the same number of segments; `static_mask` marks
/// parameters stacked once instead of per segment.
double param_error(const ParamSchedule& truth, const ParamSchedule& est, ParamErrorMode mode,
                   std::span<const double> tgrid, const std::vector<bool>& static_mask = {});

/// N_s - N_s_hat: positive means too few switches were detected.
long switch_number_error(std::size_t true_count, std::size_t detected_count);

struct HausdorffDistance {
  double value = 0.0;
  bool infinite = false;  // exactly one of the sets was empty
};

/// Symmetric Hausdorff distance between two finite sets of switch times.
HausdorffDistance hausdorff(std::span<const double> a, std::span<const double> b);

/// Index of the sample nearest to `time`; a tie (within 1e-9 of the local
/// spacing) goes to the later sample.
std::size_t nearest_sample(std::span<const double> tgrid, double time);

/// Each time replaced by its nearest grid sample.
std::vector<double> snap_to_grid(std::span<const double> times, std::span<const double> tgrid);

/// Adds independent N(0, sigma^2) draws to every entry of X. Deterministic per seed.
TimeSeries add_white_noise(const TimeSeries& data, double sigma, std::uint64_t seed);

struct MetricsReport {
  std::optional<double> e_p_segment;  // absent when the segment counts differ
  double e_p_grid = 0.0;
  double e_t = 0.0;
  long e_ns = 0;
  HausdorffDistance h_s;
  std::size_t n_p = 0;
  std::size_t n = 0;
  std::size_t ns_true = 0;
  std::size_t ns_detected = 0;
};

/// All metrics for one estimate. True switch times are the truth schedule's
/// breakpoints snapped to the data grid.
MetricsReport evaluate_metrics(const ParamSchedule& truth, const ParamSchedule& est,
                               const TimeSeries& data, const TimeSeries& model,
                               std::span<const double> detected_times,
                               const std::vector<bool>& static_mask = {});

}  // namespace paramflux
