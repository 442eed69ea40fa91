#include "paramflux/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "paramflux/error.hpp"

namespace paramflux {

namespace {

void check_breakpoints(const std::vector<double>& bps, double t_begin, double t_end) {
  for (std::size_t i = 0; i < bps.size(); ++i) {
    if (!(bps[i] > t_begin && bps[i] < t_end)) {
      throw InvalidArgument("breakpoint " + std::to_string(bps[i]) +
                            " is not strictly inside the schedule range");
    }
    if (i > 0 && !(bps[i] > bps[i - 1])) {
      throw InvalidArgument("breakpoints must be strictly increasing");
    }
  }
}

// Index of the segment containing t under the (t_{k-1}, t_k] convention.
std::size_t segment_of(const std::vector<double>& bps, double t) {
  return static_cast<std::size_t>(std::lower_bound(bps.begin(), bps.end(), t) - bps.begin());
}

double eval_track(const ParamTrack& track, double t) {
  return std::visit(
      [t](const auto& tr) -> double {
        using T = std::decay_t<decltype(tr)>;
        if constexpr (std::is_same_v<T, double>) {
          return tr;
        } else if constexpr (std::is_same_v<T, PiecewiseScalar>) {
          return tr.values[segment_of(tr.breakpoints, t)];
        } else {
          return tr.eval(t);
        }
      },
      track);
}

}  // namespace

ParamSchedule::ParamSchedule(double t_begin, double t_end, Repr repr)
    : t_begin_(t_begin), t_end_(t_end), repr_(std::move(repr)) {
  if (!(t_end > t_begin)) throw InvalidArgument("schedule range must have t_end > t_begin");
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PiecewiseValues>) {
          check_breakpoints(r.breakpoints, t_begin_, t_end_);
          if (r.values.size() != r.breakpoints.size() + 1) {
            throw InvalidArgument("piecewise schedule needs one value vector per segment");
          }
          n_params_ = r.values.front().size();
          for (const auto& v : r.values) {
            if (v.size() != n_params_) {
              throw InvalidArgument("segment value vectors must all have length n_p");
            }
            for (double x : v) {
              if (!std::isfinite(x)) throw InvalidArgument("non-finite schedule value");
            }
          }
        } else if constexpr (std::is_same_v<T, ContinuousCurves>) {
          n_params_ = r.curves.size();
          for (const auto& c : r.curves) {
            if (c.weights.size() != c.atoms.size()) {
              throw InvalidArgument("curve has mismatched atom and weight counts");
            }
          }
        } else {
          n_params_ = r.tracks.size();
          for (const auto& tr : r.tracks) {
            if (const auto* ps = std::get_if<PiecewiseScalar>(&tr)) {
              check_breakpoints(ps->breakpoints, t_begin_, t_end_);
              if (ps->values.size() != ps->breakpoints.size() + 1) {
                throw InvalidArgument("piecewise track needs one value per segment");
              }
            } else if (const auto* sf = std::get_if<SparseFit>(&tr)) {
              if (sf->weights.size() != sf->atoms.size()) {
                throw InvalidArgument("curve has mismatched atom and weight counts");
              }
            }
          }
        }
      },
      repr_);
}

ParamSchedule ParamSchedule::piecewise(double t_begin, double t_end, std::vector<double> breakpoints,
                                       std::vector<std::vector<double>> values) {
  if (values.empty()) throw InvalidArgument("piecewise schedule needs at least one segment");
  return ParamSchedule(t_begin, t_end, PiecewiseValues{std::move(breakpoints), std::move(values)});
}

ParamSchedule ParamSchedule::constant(double t_begin, double t_end, std::vector<double> values) {
  return piecewise(t_begin, t_end, {}, {std::move(values)});
}

ParamSchedule ParamSchedule::continuous(double t_begin, double t_end,
                                        std::vector<SparseFit> curves) {
  return ParamSchedule(t_begin, t_end, ContinuousCurves{std::move(curves)});
}

ParamSchedule ParamSchedule::mixed(double t_begin, double t_end, std::vector<ParamTrack> tracks) {
  return ParamSchedule(t_begin, t_end, MixedTracks{std::move(tracks)});
}

std::vector<double> ParamSchedule::eval(double t) const {
  std::vector<double> out(n_params_);
  eval_into(t, out);
  return out;
}

void ParamSchedule::eval_into(double t, std::span<double> out) const {
  const double slack = 1e-12 * (t_end_ - t_begin_);
  if (!(t >= t_begin_ - slack && t <= t_end_ + slack)) {
    throw InvalidArgument("out_of_range", "time " + std::to_string(t) +
                                              " outside schedule range [" +
                                              std::to_string(t_begin_) + ", " +
                                              std::to_string(t_end_) + "]");
  }
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PiecewiseValues>) {
          const auto& v = r.values[segment_of(r.breakpoints, t)];
          std::copy(v.begin(), v.end(), out.begin());
        } else if constexpr (std::is_same_v<T, ContinuousCurves>) {
          for (std::size_t i = 0; i < r.curves.size(); ++i) out[i] = r.curves[i].eval(t);
        } else {
          for (std::size_t i = 0; i < r.tracks.size(); ++i) out[i] = eval_track(r.tracks[i], t);
        }
      },
      repr_);
}

std::vector<double> ParamSchedule::breakpoints() const {
  if (const auto* pw = std::get_if<PiecewiseValues>(&repr_)) return pw->breakpoints;
  std::set<double> all;
  if (const auto* mx = std::get_if<MixedTracks>(&repr_)) {
    for (const auto& tr : mx->tracks) {
      if (const auto* ps = std::get_if<PiecewiseScalar>(&tr)) {
        all.insert(ps->breakpoints.begin(), ps->breakpoints.end());
      }
    }
  }
  return {all.begin(), all.end()};
}

std::vector<double> eval_schedule(const ParamSchedule& schedule, double t) {
  return schedule.eval(t);
}

}  // namespace paramflux
