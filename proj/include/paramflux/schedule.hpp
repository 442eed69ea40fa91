#pragma once

#include <span>
#include <variant>
#include <vector>

#include "paramflux/dictionary.hpp"

namespace paramflux {

/// Shared breakpoints t_1 < ... < t_{n-1}; segment k is active on
/// (t_{k-1}, t_k], the first one on [t_0, t_1].
struct PiecewiseValues {
  std::vector<double> breakpoints;
  std::vector<std::vector<double>> values;  // n segments x n_p
};

/// One scalar step function with its own breakpoints.
struct PiecewiseScalar {
  std::vector<double> breakpoints;
  std::vector<double> values;
};

/// Per-parameter representation inside a mixed schedule.
using ParamTrack = std::variant<double, PiecewiseScalar, SparseFit>;

struct ContinuousCurves {
  std::vector<SparseFit> curves;
};

struct MixedTracks {
  std::vector<ParamTrack> tracks;
};

/// p(t) over the declared range [t_begin, t_end].
class ParamSchedule {
public:
  using Repr = std::variant<PiecewiseValues, ContinuousCurves, MixedTracks>;

  static ParamSchedule piecewise(double t_begin, double t_end, std::vector<double> breakpoints,
                                 std::vector<std::vector<double>> values);
  static ParamSchedule constant(double t_begin, double t_end, std::vector<double> values);
  static ParamSchedule continuous(double t_begin, double t_end, std::vector<SparseFit> curves);
  static ParamSchedule mixed(double t_begin, double t_end, std::vector<ParamTrack> tracks);

  const Repr& repr() const { return repr_; }
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  std::size_t param_count() const { return n_params_; }
  bool is_piecewise() const { return std::holds_alternative<PiecewiseValues>(repr_); }

  /// Throws InvalidArgument("out_of_range") when t lies outside the range.
  std::vector<double> eval(double t) const;
  void eval_into(double t, std::span<double> out) const;

  /// Breakpoints where some parameter may jump (union over tracks).
  std::vector<double> breakpoints() const;

private:
  ParamSchedule(double t_begin, double t_end, Repr repr);

  double t_begin_;
  double t_end_;
  Repr repr_;
  std::size_t n_params_ = 0;
};

std::vector<double> eval_schedule(const ParamSchedule& schedule, double t);

}  // namespace paramflux
