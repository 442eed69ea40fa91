#include "paramflux/registry.hpp"

#include <cmath>
#include <numbers>

#include "paramflux/error.hpp"

namespace paramflux {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2) throw InvalidArgument("linspace needs at least 2 points");
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::vector<std::string> builtin_names() {
  return {"pvts", "gene", "gene_nonuniform", "heat_mol", "advdiff_mol"};
}

namespace {

constexpr IntegratorChoice kReferenceRk4{Method::Rk4, 10};

BuiltinSystem make_pvts() {
  auto model = ModelSpec::ode("pvts", {"x", "y"}, {"alpha", "delta", "k", "n"},
                              {"alpha/(1 + (y/k)^n) - delta*x", "alpha/(1 + (x/k)^n) - delta*y"});
  auto truth = ParamSchedule::piecewise(0.0, 24.0, {12.0},
                                        {{1.0, 0.3, 1.0, 3.35}, {8.0, 0.6, 1.0, 3.35}});
  return {std::move(model), std::move(truth), {2.0, 0.5}, linspace(0.0, 24.0, 1000),
          kReferenceRk4};
}

ModelSpec gene_model(const std::string& name) {
  return ModelSpec::ode(name, {"m", "p"}, {"alpha_m", "delta_m", "alpha_p", "delta_p"},
                        {"alpha_m - delta_m*m", "alpha_p*m - delta_p*p"});
}

BuiltinSystem make_gene() {
  auto truth = ParamSchedule::piecewise(0.0, 24.0, {12.0},
                                        {{4.0, 1.0, 4.0, 1.0}, {5.0, 1.0, 5.0, 1.0}});
  return {gene_model("gene"), std::move(truth), {0.0, 0.0}, linspace(0.0, 24.0, 1000),
          kReferenceRk4};
}

BuiltinSystem make_gene_nonuniform() {
  // alpha_m switches at 5 and 15, alpha_p at 5, 10, 15 and 20.
  auto truth = ParamSchedule::piecewise(0.0, 25.0, {5.0, 10.0, 15.0, 20.0},
                                        {{4.0, 1.0, 4.0, 1.0},
                                         {5.0, 1.0, 5.0, 1.0},
                                         {5.0, 1.0, 6.0, 1.0},
                                         {6.0, 1.0, 7.0, 1.0},
                                         {6.0, 1.0, 8.0, 1.0}});
  return {gene_model("gene_nonuniform"), std::move(truth), {0.0, 0.0},
          linspace(0.0, 25.0, 1000), kReferenceRk4};
}

BuiltinSystem make_heat() {
  PdeSpec pde;
  pde.kind = PdeKind::Heat;
  pde.name = "heat_mol";
  pde.params = {"p1", "p2"};
  pde.diffusion = "p1*t^p2";
  pde.x_lo = 0.0;
  pde.x_hi = std::numbers::pi;
  auto model = build_mol_model(pde, 100);

  std::vector<double> x0;
  for (double x : model.grid()->nodes()) {
    x0.push_back(x <= std::numbers::pi / 2 ? x : std::numbers::pi - x);
  }
  auto truth = ParamSchedule::piecewise(
      0.0, 1.0, {0.25, 0.5, 0.75}, {{0.1, 0.5}, {2.1, 0.4}, {4.1, 0.3}, {6.1, 0.2}});
  // Explicit RK4 on the diffusion stencil needs dt below ~1e-4 at D = 6.1.
  return {std::move(model), std::move(truth), std::move(x0), linspace(0.0, 1.0, 100),
          IntegratorChoice{Method::Rk4, 200}};
}

BuiltinSystem make_advdiff() {
  PdeSpec pde;
  pde.kind = PdeKind::AdvectionDiffusion;
  pde.name = "advdiff_mol";
  pde.params = {"alpha", "D"};
  pde.advection = "alpha";
  pde.diffusion = "D";
  pde.x_lo = -std::numbers::pi / 4;
  pde.x_hi = std::numbers::pi;
  auto model = build_mol_model(pde, 100);

  std::vector<double> x0;
  for (double x : model.grid()->nodes()) {
    x0.push_back(x >= 0.0 && x <= std::numbers::pi ? std::sin(3.0 * x) : 0.0);
  }
  SparseFit alpha;
  alpha.atoms.push_back(Atom{AtomFamily::Sinusoid, {3.0, -1.0}, {{3.0, 3.0}, {-1.0, -1.0}}});
  alpha.weights = {1.0};
  auto truth = ParamSchedule::mixed(0.0, 1.0, {ParamTrack{alpha}, ParamTrack{0.01}});
  return {std::move(model), std::move(truth), std::move(x0), linspace(0.0, 1.0, 100),
          IntegratorChoice{Method::Rk4, 20}};
}

}  // namespace

BuiltinSystem builtin_model(const std::string& name) {
  if (name == "pvts") return make_pvts();
  if (name == "gene") return make_gene();
  if (name == "gene_nonuniform") return make_gene_nonuniform();
  if (name == "heat_mol") return make_heat();
  if (name == "advdiff_mol") return make_advdiff();
  std::string valid;
  for (const auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown_model", "unknown model '" + name + "' (valid: " + valid + ")");
}

TimeSeries generate_data(const BuiltinSystem& system) {
  return simulate(system.model, system.truth, system.x0, system.tgrid, system.generator);
}

}  // namespace paramflux
