#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "paramflux/model.hpp"
#include "paramflux/schedule.hpp"
#include "paramflux/timeseries.hpp"

namespace paramflux {

enum class Method { ForwardEuler, Rk4 };

struct IntegratorChoice {
  Method method = Method::ForwardEuler;
  int substeps = 1;  // explicit steps per data interval
};

std::string method_name(Method method);
Method method_from_name(const std::string& name);

/// Integrates `model` over `tgrid` starting from `x0`. Parameters are read from
/// the schedule at the left end of every substep and held for that substep.
/// Throws DivergenceError naming the first column that became non-finite.
TimeSeries simulate(const ModelSpec& model, const ParamSchedule& schedule,
                    std::span<const double> x0, std::span<const double> tgrid,
                    IntegratorChoice choice);

/// Constant-parameter integration into `out` (m x |times|), the inner loop of
/// every trajectory-error objective. Column 0 is x0.
void integrate_constant(const ModelSpec& model, std::span<const double> params,
                        std::span<const double> x0, std::span<const double> times,
                        IntegratorChoice choice, Eigen::Ref<Eigen::MatrixXd> out);

/// Description of a one-dimensional PDE to discretize.
struct PdeSpec {
  PdeKind kind = PdeKind::Heat;
  std::string name;
  std::vector<std::string> params;
  std::string advection = "0";  // coefficient of du/dx
  std::string diffusion;        // coefficient of d2u/dx2
  double x_lo = 0.0;
  double x_hi = 1.0;
  double left_value = 0.0;
  double right_value = 0.0;
  std::vector<std::string> static_params;
};

/// Method-of-lines discretization onto `points` interior nodes (states u1..uM)
/// with central differences. Requires points >= 3.
ModelSpec build_mol_model(const PdeSpec& pde, std::size_t points);

}  // namespace paramflux
