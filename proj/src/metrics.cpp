#include "paramflux/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "paramflux/error.hpp"

namespace paramflux {

double traj_error(const TimeSeries& data, const TimeSeries& model) {
  if (data.X.rows() != model.X.rows() || data.X.cols() != model.X.cols()) {
    throw InvalidArgument("shape_mismatch", "trajectories differ in shape");
  }
  if (data.t.size() != model.t.size()) throw InvalidArgument("shape_mismatch", "time grids differ");
  return (data.X - model.X).norm() / static_cast<double>(data.samples());
}

namespace {

const PiecewiseValues& as_piecewise(const ParamSchedule& s) {
  if (const auto* pw = std::get_if<PiecewiseValues>(&s.repr())) return *pw;
  throw InvalidArgument("segment-mode parameter error needs piecewise schedules");
}

}  // namespace

double param_error(const ParamSchedule& truth, const ParamSchedule& est, ParamErrorMode mode,
                   std::span<const double> tgrid, const std::vector<bool>& static_mask) {
  const std::size_t np = truth.param_count();
  if (np != est.param_count()) {
    throw InvalidArgument("param_count_mismatch", "schedules have " + std::to_string(np) + " and " +
                                                      std::to_string(est.param_count()) +
                                                      " parameters");
  }
  if (np == 0) return 0.0;
  double ss = 0.0;
  if (mode == ParamErrorMode::Segment) {
    const auto& a = as_piecewise(truth);
    const auto& b = as_piecewise(est);
    if (a.values.size() != b.values.size()) {
      throw InvalidArgument("segment_count_mismatch",
                            "true schedule has " + std::to_string(a.values.size()) +
                                " segments, estimate has " + std::to_string(b.values.size()));
    }
    if (!static_mask.empty() && static_mask.size() != np) {
      throw InvalidArgument("static mask does not match the parameter count");
    }
    for (std::size_t k = 0; k < a.values.size(); ++k) {
      for (std::size_t j = 0; j < np; ++j) {
        if (k > 0 && !static_mask.empty() && static_mask[j]) continue;
        const double d = a.values[k][j] - b.values[k][j];
        ss += d * d;
      }
    }
  } else {
    std::vector<double> pa(np), pb(np);
    for (double t : tgrid) {
      truth.eval_into(t, pa);
      est.eval_into(t, pb);
      for (std::size_t j = 0; j < np; ++j) ss += (pa[j] - pb[j]) * (pa[j] - pb[j]);
    }
  }
  return std::sqrt(ss) / static_cast<double>(np);
}

long switch_number_error(std::size_t true_count, std::size_t detected_count) {
  return static_cast<long>(true_count) - static_cast<long>(detected_count);
}

namespace {

double directed(std::span<const double> from, std::span<const double> to) {
  double worst = 0.0;
  for (double x : from) {
    double best = std::numeric_limits<double>::infinity();
    for (double y : to) best = std::min(best, std::abs(x - y));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

HausdorffDistance hausdorff(std::span<const double> a, std::span<const double> b) {
  if (a.empty() && b.empty()) return {};
  if (a.empty() || b.empty()) return {std::numeric_limits<double>::infinity(), true};
  return {std::max(directed(a, b), directed(b, a)), false};
}

std::size_t nearest_sample(std::span<const double> tgrid, double time) {
  if (tgrid.empty()) throw InvalidArgument("empty time grid");
  const auto it = std::lower_bound(tgrid.begin(), tgrid.end(), time);
  if (it == tgrid.begin()) return 0;
  if (it == tgrid.end()) return tgrid.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - tgrid.begin());
  const double dl = time - tgrid[hi - 1];
  const double dh = tgrid[hi] - time;
  const double tie = 1e-9 * (tgrid[hi] - tgrid[hi - 1]);
  return dl + tie < dh ? hi - 1 : hi;
}

std::vector<double> snap_to_grid(std::span<const double> times, std::span<const double> tgrid) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(tgrid[nearest_sample(tgrid, t)]);
  return out;
}

TimeSeries add_white_noise(const TimeSeries& data, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
  TimeSeries out = data;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  // column-major walk: time-major order, one draw per entry
  for (Eigen::Index j = 0; j < out.X.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.X.rows(); ++i) out.X(i, j) += normal(rng);
  }
  return out;
}

MetricsReport evaluate_metrics(const ParamSchedule& truth, const ParamSchedule& est,
                               const TimeSeries& data, const TimeSeries& model,
                               std::span<const double> detected_times,
                               const std::vector<bool>& static_mask) {
  MetricsReport r;
  r.n_p = truth.param_count();
  r.n = data.samples();
  const std::vector<double> true_times = snap_to_grid(truth.breakpoints(), data.t);
  r.ns_true = true_times.size();
  r.ns_detected = detected_times.size();
  r.e_ns = switch_number_error(r.ns_true, r.ns_detected);
  r.h_s = hausdorff(true_times, detected_times);
  r.e_t = traj_error(data, model);
  r.e_p_grid = param_error(truth, est, ParamErrorMode::Grid, data.t, static_mask);
  const auto* a = std::get_if<PiecewiseValues>(&truth.repr());
  const auto* b = std::get_if<PiecewiseValues>(&est.repr());
  if (a && b && a->values.size() == b->values.size()) {
    r.e_p_segment = param_error(truth, est, ParamErrorMode::Segment, data.t, static_mask);
  }
  return r;
}

}  // namespace paramflux
