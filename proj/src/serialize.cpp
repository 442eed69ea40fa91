#include "paramflux/serialize.hpp"

#include "paramflux/error.hpp"
#include "paramflux/registry.hpp"

namespace paramflux {

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

std::vector<Bound> bounds_from_json(const Json& j) {
  std::vector<Bound> out;
  for (const auto& b : j) {
    if (!b.is_array() || b.size() != 2) throw InvalidArgument("config_error", "a bound is [lo, hi]");
    out.emplace_back(b[0].get<double>(), b[1].get<double>());
  }
  return out;
}

Json bounds_to_json(const std::vector<Interval>& bounds) {
  Json out = Json::array();
  for (const auto& [lo, hi] : bounds) out.push_back({lo, hi});
  return out;
}

}  // namespace

Json to_json(const SparseFit& fit) {
  Json atoms = Json::array();
  for (const auto& a : fit.atoms) {
    atoms.push_back({{"family", family_name(a.family)},
                     {"theta", a.theta},
                     {"theta_bounds", bounds_to_json(a.theta_bounds)},
                     {"label", a.label()}});
  }
  return {{"atoms", atoms},
          {"weights", fit.weights},
          {"lambda", fit.lambda},
          {"residual", fit.residual},
          {"prune_threshold", fit.prune_threshold},
          {"objective_history", fit.objective_history},
          {"active_count", fit.active_count()},
          {"expression", fit.to_string()}};
}

SparseFit sparse_fit_from_json(const Json& j) {
  SparseFit fit;
  for (const auto& a : j.at("atoms")) {
    Atom atom;
    atom.family = family_from_name(a.at("family").get<std::string>());
    atom.theta = get_or<std::vector<double>>(a, "theta", {});
    for (const auto& b : bounds_from_json(get_or<Json>(a, "theta_bounds", Json::array()))) {
      atom.theta_bounds.push_back(b);
    }
    if (atom.theta_bounds.empty()) {
      for (double v : atom.theta) atom.theta_bounds.emplace_back(v, v);
    }
    if (atom.theta.size() != theta_arity(atom.family)) {
      throw InvalidArgument("config_error", family_name(atom.family) + " atom needs " +
                                                std::to_string(theta_arity(atom.family)) +
                                                " theta values");
    }
    fit.atoms.push_back(std::move(atom));
  }
  fit.weights = j.at("weights").get<std::vector<double>>();
  if (fit.weights.size() != fit.atoms.size()) {
    throw InvalidArgument("config_error", "sparse fit needs one weight per atom");
  }
  fit.lambda = get_or(j, "lambda", 0.0);
  fit.residual = get_or(j, "residual", 0.0);
  fit.prune_threshold = get_or(j, "prune_threshold", 1e-6);
  fit.objective_history = get_or<std::vector<double>>(j, "objective_history", {});
  return fit;
}

Json to_json(const ParamSchedule& schedule) {
  Json out = {{"t_begin", schedule.t_begin()}, {"t_end", schedule.t_end()}};
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, PiecewiseValues>) {
          out["kind"] = "piecewise";
          out["breakpoints"] = r.breakpoints;
          out["values"] = r.values;
        } else if constexpr (std::is_same_v<R, ContinuousCurves>) {
          out["kind"] = "continuous";
          Json curves = Json::array();
          for (const auto& c : r.curves) curves.push_back(to_json(c));
          out["curves"] = curves;
        } else {
          out["kind"] = "mixed";
          Json tracks = Json::array();
          for (const auto& track : r.tracks) {
            std::visit(
                [&](const auto& tr) {
                  using T = std::decay_t<decltype(tr)>;
                  if constexpr (std::is_same_v<T, double>) {
                    tracks.push_back(tr);
                  } else if constexpr (std::is_same_v<T, PiecewiseScalar>) {
                    tracks.push_back({{"breakpoints", tr.breakpoints}, {"values", tr.values}});
                  } else {
                    tracks.push_back(to_json(tr));
                  }
                },
                track);
          }
          out["tracks"] = tracks;
        }
      },
      schedule.repr());
  return out;
}

ParamSchedule schedule_from_json(const Json& j) {
  const double t0 = j.at("t_begin").get<double>();
  const double t1 = j.at("t_end").get<double>();
  const std::string kind = get_or<std::string>(j, "kind", "piecewise");
  if (kind == "piecewise") {
    return ParamSchedule::piecewise(t0, t1, get_or<std::vector<double>>(j, "breakpoints", {}),
                                    j.at("values").get<std::vector<std::vector<double>>>());
  }
  if (kind == "continuous") {
    std::vector<SparseFit> curves;
    for (const auto& c : j.at("curves")) curves.push_back(sparse_fit_from_json(c));
    return ParamSchedule::continuous(t0, t1, std::move(curves));
  }
  if (kind == "mixed") {
    std::vector<ParamTrack> tracks;
    for (const auto& tr : j.at("tracks")) {
      if (tr.is_number()) {
        tracks.emplace_back(tr.get<double>());
      } else if (tr.contains("atoms")) {
        tracks.emplace_back(sparse_fit_from_json(tr));
      } else {
        tracks.emplace_back(PiecewiseScalar{get_or<std::vector<double>>(tr, "breakpoints", {}),
                                            tr.at("values").get<std::vector<double>>()});
      }
    }
    return ParamSchedule::mixed(t0, t1, std::move(tracks));
  }
  throw InvalidArgument("config_error", "unknown schedule kind '" + kind +
                                            "' (valid: piecewise, continuous, mixed)");
}

Json to_json(const MetricsReport& r) {
  Json out = {{"E_p_grid", r.e_p_grid},
              {"E_t", r.e_t},
              {"E_Ns", r.e_ns},
              {"H_s_infinite", r.h_s.infinite},
              {"n_p", r.n_p},
              {"N", r.n},
              {"N_s_true", r.ns_true},
              {"N_s_detected", r.ns_detected}};
  out["E_p_segment"] = r.e_p_segment ? Json(*r.e_p_segment) : Json(nullptr);
  out["H_s"] = r.h_s.infinite ? Json(nullptr) : Json(r.h_s.value);
  return out;
}

Json to_json(const SwitchSet& switches) {
  Json per_state = Json::object();
  for (const auto& [state, idx] : switches.per_state) per_state[std::to_string(state)] = idx;
  return {{"switch_indices", switches.indices},
          {"switch_times", switches.times},
          {"per_state", per_state}};
}

ModelSpec model_from_json(const Json& j) {
  if (j.is_string()) return builtin_model(j.get<std::string>()).model;
  if (!j.is_object()) throw InvalidArgument("config_error", "model must be a name or an object");

  std::optional<ModelSpec> model;
  if (j.contains("builtin")) {
    model = builtin_model(j.at("builtin").get<std::string>()).model;
  } else if (j.contains("pde")) {
    const Json& p = j.at("pde");
    PdeSpec pde;
    const std::string kind = get_or<std::string>(p, "kind", "heat");
    if (kind == "heat") {
      pde.kind = PdeKind::Heat;
    } else if (kind == "advection_diffusion") {
      pde.kind = PdeKind::AdvectionDiffusion;
    } else {
      throw InvalidArgument("config_error",
                            "unknown pde kind '" + kind + "' (valid: heat, advection_diffusion)");
    }
    pde.name = get_or<std::string>(j, "name", "pde");
    pde.params = p.at("params").get<std::vector<std::string>>();
    pde.advection = get_or<std::string>(p, "advection", "0");
    pde.diffusion = p.at("diffusion").get<std::string>();
    pde.x_lo = get_or(p, "x_lo", 0.0);
    pde.x_hi = get_or(p, "x_hi", 1.0);
    pde.left_value = get_or(p, "left", 0.0);
    pde.right_value = get_or(p, "right", 0.0);
    model = build_mol_model(pde, j.at("points").get<std::size_t>());
  } else {
    model = ModelSpec::ode(get_or<std::string>(j, "name", "model"),
                           j.at("states").get<std::vector<std::string>>(),
                           j.at("params").get<std::vector<std::string>>(),
                           j.at("rhs").get<std::vector<std::string>>());
  }
  if (j.contains("static")) return model->with_static(j.at("static").get<std::vector<std::string>>());
  return *model;
}

IntegratorChoice integrator_from_json(const Json& j) {
  IntegratorChoice c;
  if (j.is_null()) return c;
  c.method = method_from_name(get_or<std::string>(j, "method", "euler"));
  c.substeps = get_or(j, "substeps", 1);
  if (c.substeps < 1) throw InvalidArgument("config_error", "substeps must be >= 1");
  return c;
}

Json to_json(const IntegratorChoice& choice) {
  return {{"method", method_name(choice.method)}, {"substeps", choice.substeps}};
}

DetectConfig detect_config_from_json(const Json& j) {
  DetectConfig cfg;
  cfg.cost = cost_from_name(get_or<std::string>(j, "cost", "ar"), get_or(j, "order", 1));
  const std::string mode = get_or<std::string>(j, "mode", "noise_level");
  if (mode == "noise_level") {
    cfg.mode = NoiseLevel{get_or(j, "sigma", 1.0)};
  } else if (mode == "fixed_count") {
    cfg.mode = FixedCount{j.at("count").get<std::size_t>()};
  } else {
    throw InvalidArgument("config_error",
                          "unknown detect mode '" + mode + "' (valid: noise_level, fixed_count)");
  }
  cfg.s_g = get_or<std::size_t>(j, "s_g", 1);
  cfg.penalty_multiplier = get_or(j, "penalty_multiplier", 2.0);
  cfg.strict_count = get_or(j, "strict_count", true);
  return cfg;
}

FitConfig fit_config_from_json(const Json& j) {
  FitConfig cfg;
  cfg.optimizer = optimizer_from_name(get_or<std::string>(j, "optimizer", "nelder_mead"));
  if (j.contains("bounds")) cfg.bounds = bounds_from_json(j.at("bounds"));
  cfg.initial_guess = get_or<std::vector<double>>(j, "initial_guess", {});
  cfg.max_evals = get_or(j, "max_evals", cfg.max_evals);
  cfg.f_tol = get_or(j, "f_tol", cfg.f_tol);
  cfg.x_tol = get_or(j, "x_tol", cfg.x_tol);
  cfg.restarts = get_or(j, "restarts", cfg.restarts);
  if (j.contains("integrator")) cfg.integrator = integrator_from_json(j.at("integrator"));
  cfg.chain_segments = get_or(j, "chain_segments", false);
  if (j.contains("de")) {
    const Json& d = j.at("de");
    cfg.de.population_multiplier = get_or(d, "population_multiplier", cfg.de.population_multiplier);
    cfg.de.mutation = get_or(d, "mutation", cfg.de.mutation);
    cfg.de.crossover = get_or(d, "crossover", cfg.de.crossover);
    cfg.de.seed = get_or<std::uint64_t>(d, "seed", cfg.de.seed);
    cfg.de.rel_tol = get_or(d, "rel_tol", cfg.de.rel_tol);
    cfg.de.polish = get_or(d, "polish", cfg.de.polish);
    cfg.de.polish_evals = get_or(d, "polish_evals", cfg.de.polish_evals);
  }
  return cfg;
}

std::vector<Atom> dictionary_from_json(const Json& j) {
  if (j.is_null()) return default_dictionary();
  std::vector<Atom> atoms;
  for (const auto& a : j) {
    const AtomFamily family = family_from_name(a.at("family").get<std::string>());
    std::vector<Interval> bounds;
    for (const auto& b : bounds_from_json(get_or<Json>(a, "theta_bounds", Json::array()))) {
      bounds.push_back(b);
    }
    atoms.push_back(Atom::at_midpoint(family, std::move(bounds)));
  }
  return atoms;
}

SparseConfig sparse_config_from_json(const Json& j) {
  SparseConfig cfg;
  cfg.lambda = get_or(j, "lambda", cfg.lambda);
  cfg.max_rounds = get_or(j, "max_rounds", cfg.max_rounds);
  cfg.tol = get_or(j, "tol", cfg.tol);
  cfg.prune_threshold = get_or(j, "prune_threshold", cfg.prune_threshold);
  cfg.theta_evals = get_or(j, "theta_evals", cfg.theta_evals);
  cfg.starts = get_or(j, "starts", cfg.starts);
  cfg.debias = get_or(j, "debias", cfg.debias);
  return cfg;
}

std::vector<double> time_grid_from_json(const Json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  return linspace(j.at("start").get<double>(), j.at("stop").get<double>(),
                  j.at("count").get<std::size_t>());
}

}  // namespace paramflux
