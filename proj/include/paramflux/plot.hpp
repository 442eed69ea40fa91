#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paramflux/schedule.hpp"
#include "paramflux/timeseries.hpp"

namespace paramflux {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  std::vector<double> err;  // optional symmetric error bars
};

/// Minimal static line chart.
void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::vector<PlotSeries>& series);

/// Tidy CSV: t, <state>_data, <state>_model for every state.
void write_trajectory_csv(const std::filesystem::path& path, const TimeSeries& data,
                          const TimeSeries& model);

/// Tidy CSV: t, <param>_est[, <param>_true] on `tgrid`.
void write_param_csv(const std::filesystem::path& path, std::span<const double> tgrid,
                     const std::vector<std::string>& names, const ParamSchedule& est,
                     const std::optional<ParamSchedule>& truth);

/// Up to `max_states` evenly spaced state indices, for plotting wide systems.
std::vector<std::size_t> plotted_states(std::size_t states, std::size_t max_states = 4);

}  // namespace paramflux
