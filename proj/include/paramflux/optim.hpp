#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace paramflux {

using Objective = std::function<double(std::span<const double>)>;
using Bound = std::pair<double, double>;

enum class OptimizerKind { NelderMead, Powell, DifferentialEvolution };

std::string optimizer_name(OptimizerKind kind);
OptimizerKind optimizer_from_name(const std::string& name);

struct DeSettings {
  int population_multiplier = 15;  // population = multiplier * dimension
  double mutation = 0.8;           // F
  double crossover = 0.9;          // CR
  std::uint64_t seed = 0;
  double rel_tol = 1e-8;  // stop when std(f) <= f_tol + rel_tol * |mean(f)|
  bool polish = true;     // bounded Nelder-Mead from the best member at the end
  int polish_evals = 4000;
};

struct OptimOptions {
  std::vector<Bound> bounds;  // empty: unbounded (not allowed for DE)
  int max_evals = 20000;
  double f_tol = 1e-10;
  double x_tol = 1e-10;
  /// Nelder-Mead only: rebuild the simplex around the best point up to this many
  /// times while a restart still improves the objective.
  int restarts = 0;
  DeSettings de;
};

struct OptimResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

/// Downhill simplex with coefficients (1, 2, 0.5, 0.5). Stops when both the
/// objective spread and the simplex extent fall below f_tol / x_tol, or after
/// max_evals evaluations. Trial points are clipped into the bounds.
OptimResult nelder_mead(const Objective& f, std::span<const double> x0, const OptimOptions& opts);

/// Powell's direction-set method with bracketing and golden-section line
/// searches. Bounds are honored by clamping each evaluated point.
OptimResult powell(const Objective& f, std::span<const double> x0, const OptimOptions& opts);

/// DE/rand/1/bin inside the bounds. Deterministic for a given seed.
OptimResult differential_evolution(const Objective& f, const OptimOptions& opts);

OptimResult minimize(OptimizerKind kind, const Objective& f, std::span<const double> x0,
                     const OptimOptions& opts);

}  // namespace paramflux
