#include "paramflux/integrate.hpp"

#include <cmath>

#include "paramflux/error.hpp"

namespace paramflux {

std::string method_name(Method method) {
  return method == Method::Rk4 ? "rk4" : "euler";
}

Method method_from_name(const std::string& name) {
  if (name == "euler" || name == "forward_euler") return Method::ForwardEuler;
  if (name == "rk4") return Method::Rk4;
  throw InvalidArgument("unknown integration method '" + name + "' (valid: euler, rk4)");
}

namespace {

// `params_at(t)` returns the parameter vector to hold over a substep starting at t.
template <class ParamsAt>
void integrate(const ModelSpec& model, ParamsAt&& params_at, std::span<const double> x0,
               std::span<const double> times, IntegratorChoice choice,
               Eigen::Ref<Eigen::MatrixXd> out) {
  const std::size_t m = model.state_count();
  const std::size_t n = times.size();
  if (x0.size() != m) {
    throw InvalidArgument("initial state has length " + std::to_string(x0.size()) +
                          ", expected " + std::to_string(m));
  }
  if (choice.substeps < 1) throw InvalidArgument("substeps must be >= 1");
  if (static_cast<std::size_t>(out.rows()) != m || static_cast<std::size_t>(out.cols()) != n) {
    throw InvalidArgument("output buffer has the wrong shape");
  }

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(x[i])) throw DivergenceError(0);
    out(static_cast<Eigen::Index>(i), 0) = x[i];
  }

  for (std::size_t j = 1; j < n; ++j) {
    const double t0 = times[j - 1];
    const double h = (times[j] - t0) / choice.substeps;
    for (int s = 0; s < choice.substeps; ++s) {
      const double ts = t0 + h * s;
      std::span<const double> p = params_at(ts);
      if (choice.method == Method::ForwardEuler) {
        model.eval_rhs(x, p, ts, k1);
        for (std::size_t i = 0; i < m; ++i) x[i] += h * k1[i];
      } else {
        model.eval_rhs(x, p, ts, k1);
        for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        model.eval_rhs(tmp, p, ts + 0.5 * h, k2);
        for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        model.eval_rhs(tmp, p, ts + 0.5 * h, k3);
        for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + h * k3[i];
        model.eval_rhs(tmp, p, ts + h, k4);
        for (std::size_t i = 0; i < m; ++i) {
          x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(x[i])) throw DivergenceError(j);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[i];
    }
  }
}

void check_grid(std::span<const double> times) {
  if (times.empty()) throw InvalidArgument("empty time grid");
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) throw InvalidArgument("time grid must be strictly increasing");
  }
}

}  // namespace

TimeSeries simulate(const ModelSpec& model, const ParamSchedule& schedule,
                    std::span<const double> x0, std::span<const double> tgrid,
                    IntegratorChoice choice) {
  check_grid(tgrid);
  if (schedule.param_count() != model.param_count()) {
    throw InvalidArgument("schedule has " + std::to_string(schedule.param_count()) +
                          " parameters, model expects " + std::to_string(model.param_count()));
  }
  TimeSeries ts;
  ts.t.assign(tgrid.begin(), tgrid.end());
  ts.names = model.states();
  ts.X.resize(static_cast<Eigen::Index>(model.state_count()),
              static_cast<Eigen::Index>(tgrid.size()));
  std::vector<double> p(model.param_count());
  integrate(
      model,
      [&](double t) -> std::span<const double> {
        schedule.eval_into(t, p);
        return p;
      },
      x0, tgrid, choice, ts.X);
  return ts;
}

void integrate_constant(const ModelSpec& model, std::span<const double> params,
                        std::span<const double> x0, std::span<const double> times,
                        IntegratorChoice choice, Eigen::Ref<Eigen::MatrixXd> out) {
  check_grid(times);
  if (params.size() != model.param_count()) {
    throw InvalidArgument("parameter vector has the wrong length");
  }
  integrate(
      model, [&](double) { return params; }, x0, times, choice, out);
}

ModelSpec build_mol_model(const PdeSpec& pde, std::size_t points) {
  if (points < 3) {
    throw InvalidArgument("method of lines needs at least 3 interior points, got " +
                          std::to_string(points));
  }
  if (!(pde.x_hi > pde.x_lo)) throw InvalidArgument("spatial domain must have x_hi > x_lo");

  MolGrid grid;
  grid.pde = pde.kind;
  grid.points = points;
  grid.x_lo = pde.x_lo;
  grid.x_hi = pde.x_hi;
  grid.left_value = pde.left_value;
  grid.right_value = pde.right_value;
  const std::vector<std::string> no_states;
  grid.advection = parse_expr(pde.kind == PdeKind::Heat ? "0" : pde.advection, no_states,
                              pde.params);
  grid.diffusion = parse_expr(pde.diffusion, no_states, pde.params);

  std::vector<std::string> states(points);
  for (std::size_t i = 0; i < points; ++i) states[i] = "u" + std::to_string(i + 1);

  const double h = grid.spacing();
  const bool has_advection = pde.kind == PdeKind::AdvectionDiffusion;
  std::vector<Expr> rhs;
  rhs.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const Expr left = i == 0 ? Expr::number(pde.left_value) : Expr::state(i - 1, states[i - 1]);
    const Expr right =
        i + 1 == points ? Expr::number(pde.right_value) : Expr::state(i + 1, states[i + 1]);
    const Expr centre = Expr::state(i, states[i]);
    Expr second = grid.diffusion * (left - Expr::number(2.0) * centre + right) /
                  Expr::number(h * h);
    if (has_advection) {
      Expr first = grid.advection * (right - left) / Expr::number(2.0 * h);
      rhs.push_back(first + second);
    } else {
      rhs.push_back(second);
    }
  }

  std::vector<bool> mask(pde.params.size(), false);
  for (const auto& s : pde.static_params) {
    bool found = false;
    for (std::size_t k = 0; k < pde.params.size(); ++k) {
      if (pde.params[k] == s) {
        mask[k] = true;
        found = true;
      }
    }
    if (!found) throw UnknownIdentifierError(s);
  }
  return ModelSpec(pde.name, std::move(states), pde.params, std::move(rhs), std::move(mask),
                   ModelKind::Mol, std::move(grid));
}

}  // namespace paramflux
