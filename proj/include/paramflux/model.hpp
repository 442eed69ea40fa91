#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paramflux/expr.hpp"

namespace paramflux {

enum class ModelKind { Ode, Mol };

enum class PdeKind { Heat, AdvectionDiffusion };

/// Spatial grid metadata of a method-of-lines system:
/// du/dt = advection(t, p) * du/dx + diffusion(t, p) * d2u/dx2 on the open
/// interval (x_lo, x_hi) with Dirichlet values at both ends. The states are
/// the `points` interior nodes, spaced (x_hi - x_lo) / (points + 1) apart.
struct MolGrid {
  PdeKind pde = PdeKind::Heat;
  std::size_t points = 0;
  double x_lo = 0.0;
  double x_hi = 1.0;
  double left_value = 0.0;
  double right_value = 0.0;
  Expr advection;
  Expr diffusion;

  double spacing() const { return (x_hi - x_lo) / static_cast<double>(points + 1); }
  std::vector<double> nodes() const;
};

/// A named dynamical system dX/dt = f(X, p(t)). Immutable once built.
class ModelSpec {
public:
  /// Parses `rhs` against the given names. `static_params` lists parameters
  /// estimated as one constant shared by all segments.
  static ModelSpec ode(std::string name, std::vector<std::string> states,
                       std::vector<std::string> params, const std::vector<std::string>& rhs,
                       const std::vector<std::string>& static_params = {});

  /// Builds from already constructed trees (used by the method-of-lines builder).
  ModelSpec(std::string name, std::vector<std::string> states, std::vector<std::string> params,
            std::vector<Expr> rhs, std::vector<bool> static_mask, ModelKind kind = ModelKind::Ode,
            std::optional<MolGrid> grid = std::nullopt);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& params() const { return params_; }
  const std::vector<Expr>& rhs() const { return rhs_; }
  const std::vector<bool>& static_mask() const { return static_mask_; }
  ModelKind kind() const { return kind_; }
  const std::optional<MolGrid>& grid() const { return grid_; }

  std::size_t state_count() const { return states_.size(); }
  std::size_t param_count() const { return params_.size(); }
  bool has_static() const;
  std::optional<std::size_t> param_index(std::string_view name) const;

  /// Copy with a different static-parameter designation.
  ModelSpec with_static(const std::vector<std::string>& static_params) const;

  /// Writes f(x, p, t) into `out`. Method-of-lines systems use the stencil
  /// directly; the per-state `rhs()` trees describe the same function.
  /// Throws DomainError carrying the offending state index.
  void eval_rhs(std::span<const double> x, std::span<const double> p, double t,
                std::span<double> out) const;

  /// Evaluates the per-state expression trees only, ignoring any stencil fast path.
  void eval_rhs_generic(std::span<const double> x, std::span<const double> p, double t,
                        std::span<double> out) const;

private:
  std::string name_;
  std::vector<std::string> states_;
  std::vector<std::string> params_;
  std::vector<Expr> rhs_;
  std::vector<bool> static_mask_;
  ModelKind kind_;
  std::optional<MolGrid> grid_;

  std::vector<CompiledExpr> compiled_;
  CompiledExpr advection_;
  CompiledExpr diffusion_;
};

/// f(x, p) at time t.
std::vector<double> eval_rhs(const ModelSpec& model, std::span<const double> x,
                             std::span<const double> p, double t);

}  // namespace paramflux
