#include "paramflux/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "paramflux/error.hpp"

namespace paramflux {

std::vector<double> MolGrid::nodes() const {
  std::vector<double> x(points);
  const double h = spacing();
  for (std::size_t i = 0; i < points; ++i) x[i] = x_lo + h * static_cast<double>(i + 1);
  return x;
}

namespace {

void check_unique(const std::vector<std::string>& names, const char* what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw InvalidArgument(std::string("empty ") + what + " name");
    if (n == kTimeSymbol) {
      throw InvalidArgument(std::string(what) + " may not be named '" + std::string(kTimeSymbol) +
                            "'");
    }
    if (!seen.insert(n).second) {
      throw InvalidArgument(std::string("duplicate ") + what + " name '" + n + "'");
    }
  }
}

std::vector<bool> mask_from_names(const std::vector<std::string>& params,
                                  const std::vector<std::string>& static_params) {
  std::vector<bool> mask(params.size(), false);
  for (const auto& s : static_params) {
    const auto it = std::find(params.begin(), params.end(), s);
    if (it == params.end()) throw UnknownIdentifierError(s);
    mask[static_cast<std::size_t>(it - params.begin())] = true;
  }
  return mask;
}

}  // namespace

ModelSpec ModelSpec::ode(std::string name, std::vector<std::string> states,
                         std::vector<std::string> params, const std::vector<std::string>& rhs,
                         const std::vector<std::string>& static_params) {
  std::vector<Expr> trees;
  trees.reserve(rhs.size());
  for (const auto& text : rhs) trees.push_back(parse_expr(text, states, params));
  auto mask = mask_from_names(params, static_params);
  return ModelSpec(std::move(name), std::move(states), std::move(params), std::move(trees),
                   std::move(mask));
}

ModelSpec::ModelSpec(std::string name, std::vector<std::string> states,
                     std::vector<std::string> params, std::vector<Expr> rhs,
                     std::vector<bool> static_mask, ModelKind kind, std::optional<MolGrid> grid)
    : name_(std::move(name)),
      states_(std::move(states)),
      params_(std::move(params)),
      rhs_(std::move(rhs)),
      static_mask_(std::move(static_mask)),
      kind_(kind),
      grid_(std::move(grid)) {
  if (states_.empty()) throw InvalidArgument("model needs at least one state");
  check_unique(states_, "state");
  check_unique(params_, "parameter");
  for (const auto& s : states_) {
    if (std::find(params_.begin(), params_.end(), s) != params_.end()) {
      throw InvalidArgument("name '" + s + "' is both a state and a parameter");
    }
  }
  if (rhs_.size() != states_.size()) {
    throw InvalidArgument("model has " + std::to_string(states_.size()) + " states but " +
                          std::to_string(rhs_.size()) + " right-hand sides");
  }
  if (static_mask_.empty()) static_mask_.assign(params_.size(), false);
  if (static_mask_.size() != params_.size()) {
    throw InvalidArgument("static mask length differs from the parameter count");
  }
  if (kind_ == ModelKind::Mol) {
    if (!grid_) throw InvalidArgument("method-of-lines model without grid metadata");
    if (grid_->points != states_.size()) {
      throw InvalidArgument("grid size does not match the state count");
    }
    advection_ = CompiledExpr(grid_->advection);
    diffusion_ = CompiledExpr(grid_->diffusion);
  }
  compiled_.reserve(rhs_.size());
  for (const auto& e : rhs_) compiled_.emplace_back(e);
}

bool ModelSpec::has_static() const {
  return std::find(static_mask_.begin(), static_mask_.end(), true) != static_mask_.end();
}

std::optional<std::size_t> ModelSpec::param_index(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i] == name) return i;
  }
  return std::nullopt;
}

ModelSpec ModelSpec::with_static(const std::vector<std::string>& static_params) const {
  ModelSpec copy = *this;
  copy.static_mask_ = mask_from_names(params_, static_params);
  return copy;
}

void ModelSpec::eval_rhs(std::span<const double> x, std::span<const double> p, double t,
                         std::span<double> out) const {
  if (kind_ != ModelKind::Mol) {
    eval_rhs_generic(x, p, t, out);
    return;
  }
  // Coefficients do not depend on the state, so a domain error cannot be
  // attributed to one node; report the first.
  double a = 0.0;
  double d = 0.0;
  try {
    a = advection_.eval(x, p, t);
    d = diffusion_.eval(x, p, t);
  } catch (const DomainError& e) {
    throw DomainError(e.what(), 0);
  }
  const std::size_t m = x.size();
  const double h = grid_->spacing();
  const double adv = a / (2.0 * h);
  const double dif = d / (h * h);
  for (std::size_t i = 0; i < m; ++i) {
    const double left = i == 0 ? grid_->left_value : x[i - 1];
    const double right = i + 1 == m ? grid_->right_value : x[i + 1];
    out[i] = adv * (right - left) + dif * (left - 2.0 * x[i] + right);
  }
}

void ModelSpec::eval_rhs_generic(std::span<const double> x, std::span<const double> p, double t,
                                 std::span<double> out) const {
  for (std::size_t i = 0; i < compiled_.size(); ++i) {
    try {
      out[i] = compiled_[i].eval(x, p, t);
    } catch (const DomainError& e) {
      throw DomainError(e.what(), i);
    }
  }
}

std::vector<double> eval_rhs(const ModelSpec& model, std::span<const double> x,
                             std::span<const double> p, double t) {
  if (x.size() != model.state_count()) {
    throw InvalidArgument("state vector has length " + std::to_string(x.size()) + ", expected " +
                          std::to_string(model.state_count()));
  }
  if (p.size() != model.param_count()) {
    throw InvalidArgument("parameter vector has length " + std::to_string(p.size()) +
                          ", expected " + std::to_string(model.param_count()));
  }
  std::vector<double> out(x.size());
  model.eval_rhs(x, p, t, out);
  return out;
}

}  // namespace paramflux
