#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "paramflux/detect.hpp"
#include "paramflux/integrate.hpp"
#include "paramflux/optim.hpp"

namespace paramflux {

struct FitConfig {
  OptimizerKind optimizer = OptimizerKind::NelderMead;
  std::vector<Bound> bounds;         // one per model parameter, or empty
  std::vector<double> initial_guess;  // one per model parameter, or empty
  int max_evals = 20000;
  double f_tol = 1e-10;
  double x_tol = 1e-10;
  int restarts = 0;  // Nelder-Mead simplex restarts
  DeSettings de;
  IntegratorChoice integrator{Method::ForwardEuler, 1};
  /// Start each segment from the previous segment's simulated end state
  /// instead of the data column at the segment start.
  bool chain_segments = false;
};

struct FitResult {
  ParamSchedule schedule;
  std::vector<std::vector<double>> segment_values;  // n_segments x n_p
  std::vector<double> static_values;                // masked parameters, model order
  std::vector<std::size_t> boundaries;              // 0, switch indices..., N
  double objective = 0.0;                           // E_t of the segment reconstruction
  std::vector<double> per_segment_objective;        // Frobenius norm per segment
  int evals = 0;
};

/// Penalty returned when a candidate diverges or leaves the model's domain.
inline constexpr double kDivergencePenalty = 1e12;

/// Frobenius norm of data - model over columns [lo, hi), with the model started
/// from the data column lo and parameters held constant.
double segment_objective(const ModelSpec& model, const TimeSeries& data, std::size_t lo,
                         std::size_t hi, std::span<const double> params, IntegratorChoice choice);

/// Same, but starting from an explicit state.
double segment_objective_from(const ModelSpec& model, const TimeSeries& data, std::size_t lo,
                              std::size_t hi, std::span<const double> params,
                              std::span<const double> x0, IntegratorChoice choice);

/// Segment boundaries 0 = b_0 < b_1 < ... < b_K = N from switch indices.
std::vector<std::size_t> segment_boundaries(const SwitchSet& switches, std::size_t n);

/// Piecewise-constant fit: independent per-segment fits, or one joint fit over
/// [static values; per-segment varying values] when the model masks some
/// parameters as static.
FitResult fit_piecewise(const ModelSpec& model, const TimeSeries& data, const SwitchSet& switches,
                        const FitConfig& cfg);

/// Model trajectory for fitted segment values: each segment simulated with its
/// constant vector from the data column at its start (or chained).
TimeSeries reconstruct_segments(const ModelSpec& model, const TimeSeries& data,
                                const std::vector<std::size_t>& boundaries,
                                const std::vector<std::vector<double>>& segment_values,
                                IntegratorChoice choice, bool chain_segments = false);

}  // namespace paramflux
