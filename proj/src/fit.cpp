#include "paramflux/fit.hpp"

#include <cmath>

#include "paramflux/error.hpp"

namespace paramflux {

namespace {

// Reusable evaluator for one segment; owns the integration buffer.
class SegmentEvaluator {
 public:
  // With `carry`, one extra column is integrated so that last_state() is the
  // model state at the next segment's first sample.
  SegmentEvaluator(const ModelSpec& model, const TimeSeries& data, std::size_t lo, std::size_t hi,
                   IntegratorChoice choice, bool carry = false)
      : model_(model), data_(data), lo_(lo), hi_(hi), choice_(choice) {
    if (hi > data.samples() || lo >= hi || hi - lo < 2) {
      throw InvalidArgument("segment [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            ") needs at least 2 samples");
    }
    extra_ = carry && hi < data.samples() ? 1 : 0;
    buffer_.resize(static_cast<Eigen::Index>(model.state_count()),
                   static_cast<Eigen::Index>(hi - lo + extra_));
  }

  std::span<const double> times() const {
    return std::span<const double>(data_.t).subspan(lo_, hi_ - lo_ + extra_);
  }

  // Returns the norm, or the penalty if integration fails.
  double operator()(std::span<const double> params, std::span<const double> x0) {
    for (double v : params) {
      if (!std::isfinite(v)) return kDivergencePenalty;
    }
    try {
      integrate_constant(model_, params, x0, times(), choice_, buffer_);
    } catch (const DivergenceError&) {
      return kDivergencePenalty;
    } catch (const DomainError&) {
      return kDivergencePenalty;
    }
    const auto len = static_cast<Eigen::Index>(hi_ - lo_);
    const double norm =
        (data_.X.middleCols(static_cast<Eigen::Index>(lo_), len) - buffer_.leftCols(len)).norm();
    return std::isfinite(norm) ? norm : kDivergencePenalty;
  }

  std::vector<double> data_start() const {
    std::vector<double> x(model_.state_count());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = data_.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(lo_));
    }
    return x;
  }

  // Final column of the most recent successful integration.
  std::vector<double> last_state() const {
    std::vector<double> x(model_.state_count());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = buffer_(static_cast<Eigen::Index>(i), buffer_.cols() - 1);
    }
    return x;
  }

 private:
  const ModelSpec& model_;
  const TimeSeries& data_;
  std::size_t lo_, hi_;
  std::size_t extra_ = 0;
  IntegratorChoice choice_;
  Eigen::MatrixXd buffer_;
};

void check_inputs(const ModelSpec& model, const TimeSeries& data, const FitConfig& cfg) {
  if (data.states() != model.state_count()) {
    throw InvalidArgument("dimension_mismatch", "data has " + std::to_string(data.states()) +
                                                    " states, model has " +
                                                    std::to_string(model.state_count()));
  }
  const std::size_t np = model.param_count();
  if (!cfg.bounds.empty() && cfg.bounds.size() != np) {
    throw InvalidArgument("dimension_mismatch", "bounds must have one entry per parameter");
  }
  if (!cfg.initial_guess.empty() && cfg.initial_guess.size() != np) {
    throw InvalidArgument("dimension_mismatch", "initial_guess must have one entry per parameter");
  }
}

std::vector<double> default_guess(const FitConfig& cfg, std::size_t np) {
  if (!cfg.initial_guess.empty()) return cfg.initial_guess;
  std::vector<double> g(np, 1.0);
  if (!cfg.bounds.empty()) {
    for (std::size_t i = 0; i < np; ++i) g[i] = 0.5 * (cfg.bounds[i].first + cfg.bounds[i].second);
  }
  return g;
}

OptimOptions make_options(const FitConfig& cfg, std::vector<Bound> bounds) {
  OptimOptions o;
  o.bounds = std::move(bounds);
  o.max_evals = cfg.max_evals;
  o.f_tol = cfg.f_tol;
  o.x_tol = cfg.x_tol;
  o.restarts = cfg.restarts;
  o.de = cfg.de;
  return o;
}

}  // namespace

double segment_objective_from(const ModelSpec& model, const TimeSeries& data, std::size_t lo,
                              std::size_t hi, std::span<const double> params,
                              std::span<const double> x0, IntegratorChoice choice) {
  if (params.size() != model.param_count()) {
    throw InvalidArgument("dimension_mismatch", "candidate has the wrong number of parameters");
  }
  SegmentEvaluator eval(model, data, lo, hi, choice);
  return eval(params, x0);
}

double segment_objective(const ModelSpec& model, const TimeSeries& data, std::size_t lo,
                         std::size_t hi, std::span<const double> params, IntegratorChoice choice) {
  if (params.size() != model.param_count()) {
    throw InvalidArgument("dimension_mismatch", "candidate has the wrong number of parameters");
  }
  SegmentEvaluator eval(model, data, lo, hi, choice);
  return eval(params, eval.data_start());
}

std::vector<std::size_t> segment_boundaries(const SwitchSet& switches, std::size_t n) {
  std::vector<std::size_t> b{0};
  for (std::size_t i : switches.indices) {
    if (i <= b.back() || i >= n) throw InvalidArgument("switch indices do not fit the data");
    b.push_back(i);
  }
  b.push_back(n);
  return b;
}

FitResult fit_piecewise(const ModelSpec& model, const TimeSeries& data, const SwitchSet& switches,
                        const FitConfig& cfg) {
  check_inputs(model, data, cfg);
  const std::size_t np = model.param_count();
  const std::size_t n = data.samples();
  const auto bounds_of = segment_boundaries(switches, n);
  const std::size_t nseg = bounds_of.size() - 1;

  std::vector<SegmentEvaluator> evals;
  evals.reserve(nseg);
  for (std::size_t k = 0; k < nseg; ++k) {
    evals.emplace_back(model, data, bounds_of[k], bounds_of[k + 1], cfg.integrator,
                       cfg.chain_segments);
  }

  const auto& mask = model.static_mask();
  std::vector<std::size_t> fixed_idx, vary_idx;
  for (std::size_t i = 0; i < np; ++i) (mask[i] ? fixed_idx : vary_idx).push_back(i);
  const std::vector<double> guess = default_guess(cfg, np);

  FitResult out{ParamSchedule::constant(data.t.front(), data.t.back(), guess), {}, {}, bounds_of,
                0.0, {}, 0};
  out.segment_values.assign(nseg, guess);

  if (fixed_idx.empty()) {
    std::vector<double> x0 = evals[0].data_start();
    for (std::size_t k = 0; k < nseg; ++k) {
      if (!cfg.chain_segments) x0 = evals[k].data_start();
      auto objective = [&](std::span<const double> p) { return evals[k](p, x0); };
      const OptimResult r = minimize(cfg.optimizer, objective, guess, make_options(cfg, cfg.bounds));
      out.segment_values[k] = r.x;
      out.evals += r.evals;
      if (cfg.chain_segments) {
        evals[k](r.x, x0);
        x0 = evals[k].last_state();
      }
    }
  } else {
    // Decision vector: [static values; segment 0 varying; segment 1 varying; ...].
    const std::size_t ns = fixed_idx.size(), nv = vary_idx.size();
    std::vector<double> z0;
    std::vector<Bound> zb;
    for (std::size_t i : fixed_idx) {
      z0.push_back(guess[i]);
      if (!cfg.bounds.empty()) zb.push_back(cfg.bounds[i]);
    }
    for (std::size_t k = 0; k < nseg; ++k) {
      for (std::size_t i : vary_idx) {
        z0.push_back(guess[i]);
        if (!cfg.bounds.empty()) zb.push_back(cfg.bounds[i]);
      }
    }
    auto expand = [&](std::span<const double> z, std::size_t k, std::vector<double>& p) {
      for (std::size_t j = 0; j < ns; ++j) p[fixed_idx[j]] = z[j];
      for (std::size_t j = 0; j < nv; ++j) p[vary_idx[j]] = z[ns + k * nv + j];
    };
    std::vector<double> p(np), x0;
    auto objective = [&](std::span<const double> z) {
      double total = 0.0;
      x0 = evals[0].data_start();
      for (std::size_t k = 0; k < nseg; ++k) {
        expand(z, k, p);
        if (!cfg.chain_segments) x0 = evals[k].data_start();
        const double v = evals[k](p, x0);
        total += v;
        if (cfg.chain_segments) {
          if (v >= kDivergencePenalty) return total + kDivergencePenalty * double(nseg - k - 1);
          x0 = evals[k].last_state();
        }
      }
      return total;
    };
    const OptimResult r = minimize(cfg.optimizer, objective, z0, make_options(cfg, zb));
    out.evals = r.evals;
    for (std::size_t k = 0; k < nseg; ++k) expand(r.x, k, out.segment_values[k]);
    for (std::size_t j = 0; j < ns; ++j) out.static_values.push_back(r.x[j]);
  }

  // Final per-segment objectives with the same start-state rule as the fit.
  std::vector<double> x0 = evals[0].data_start();
  double sq = 0.0;
  for (std::size_t k = 0; k < nseg; ++k) {
    if (!cfg.chain_segments) x0 = evals[k].data_start();
    const double v = evals[k](out.segment_values[k], x0);
    out.per_segment_objective.push_back(v);
    sq += v * v;
    if (cfg.chain_segments) x0 = evals[k].last_state();
  }
  out.objective = std::sqrt(sq) / static_cast<double>(n);

  std::vector<double> breakpoints;
  for (std::size_t k = 1; k < nseg; ++k) breakpoints.push_back(data.t[bounds_of[k]]);
  out.schedule = ParamSchedule::piecewise(data.t.front(), data.t.back(), std::move(breakpoints),
                                          out.segment_values);
  return out;
}

TimeSeries reconstruct_segments(const ModelSpec& model, const TimeSeries& data,
                                const std::vector<std::size_t>& boundaries,
                                const std::vector<std::vector<double>>& segment_values,
                                IntegratorChoice choice, bool chain_segments) {
  if (boundaries.size() != segment_values.size() + 1 || boundaries.front() != 0 ||
      boundaries.back() != data.samples()) {
    throw InvalidArgument("segment boundaries do not match the data");
  }
  TimeSeries out;
  out.t = data.t;
  out.names = data.names;
  out.X.resize(data.X.rows(), data.X.cols());
  std::vector<double> x0(model.state_count());
  for (std::size_t k = 0; k + 1 < boundaries.size(); ++k) {
    const std::size_t lo = boundaries[k], hi = boundaries[k + 1];
    if (k == 0 || !chain_segments) {
      for (std::size_t i = 0; i < x0.size(); ++i) {
        x0[i] = data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(lo));
      }
    }
    const std::size_t extra = chain_segments && hi < data.samples() ? 1 : 0;
    Eigen::MatrixXd block(out.X.rows(), static_cast<Eigen::Index>(hi - lo + extra));
    integrate_constant(model, segment_values[k], x0,
                       std::span<const double>(data.t).subspan(lo, hi - lo + extra), choice, block);
    out.X.middleCols(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) =
        block.leftCols(static_cast<Eigen::Index>(hi - lo));
    for (std::size_t i = 0; i < x0.size(); ++i) {
      x0[i] = block(static_cast<Eigen::Index>(i), block.cols() - 1);
    }
  }
  return out;
}

}  // namespace paramflux
