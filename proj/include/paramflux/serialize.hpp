#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "paramflux/detect.hpp"
#include "paramflux/fit.hpp"
#include "paramflux/metrics.hpp"
#include "paramflux/sparsereg.hpp"

namespace paramflux {

using Json = nlohmann::json;

Json to_json(const SparseFit& fit);
SparseFit sparse_fit_from_json(const Json& j);

/// {"kind": "piecewise" | "continuous" | "mixed", "t_begin", "t_end", ...}.
Json to_json(const ParamSchedule& schedule);
ParamSchedule schedule_from_json(const Json& j);

Json to_json(const MetricsReport& report);
Json to_json(const SwitchSet& switches);

/// A builtin name ("pvts") or an inline definition:
///   {"name", "states", "params", "rhs", "static"} for an ODE, or
///   {"name", "pde": {"kind", "params", "advection", "diffusion", "x_lo", "x_hi",
///    "left", "right"}, "points", "static"} for a method-of-lines system.
/// A "static" list on either form overrides the static mask.
ModelSpec model_from_json(const Json& j);

IntegratorChoice integrator_from_json(const Json& j);
Json to_json(const IntegratorChoice& choice);

/// {"cost": "ar" | "l2" | "l1", "order", "mode": "noise_level" | "fixed_count",
///  "sigma", "count", "s_g", "penalty_multiplier", "strict_count"}
DetectConfig detect_config_from_json(const Json& j);

/// {"optimizer", "bounds", "initial_guess", "max_evals", "f_tol", "x_tol",
///  "restarts", "integrator", "chain_segments", "de": {...}}
FitConfig fit_config_from_json(const Json& j);

/// Dictionary entries {"family", "theta_bounds"}; an absent list means the default.
std::vector<Atom> dictionary_from_json(const Json& j);
SparseConfig sparse_config_from_json(const Json& j);

/// Accepts a list or {"start", "stop", "count"}.
std::vector<double> time_grid_from_json(const Json& j);

}  // namespace paramflux
