#include "paramflux/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "paramflux/error.hpp"

namespace paramflux {

std::string optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::NelderMead:
      return "nelder_mead";
    case OptimizerKind::Powell:
      return "powell";
    case OptimizerKind::DifferentialEvolution:
      return "differential_evolution";
  }
  return "nelder_mead";
}

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "nelder_mead" || name == "nelder-mead") return OptimizerKind::NelderMead;
  if (name == "powell") return OptimizerKind::Powell;
  if (name == "differential_evolution" || name == "de") return OptimizerKind::DifferentialEvolution;
  throw InvalidArgument("unknown optimizer '" + name +
                        "' (valid: nelder_mead, powell, differential_evolution)");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_bounds(const std::vector<Bound>& bounds, std::size_t dim) {
  if (bounds.empty()) return;
  if (bounds.size() != dim) {
    throw InvalidArgument("expected " + std::to_string(dim) + " bounds, got " +
                          std::to_string(bounds.size()));
  }
  for (const auto& [lo, hi] : bounds) {
    if (!(lo < hi)) throw InvalidArgument("every bound needs lo < hi");
  }
}

void clip(std::vector<double>& x, const std::vector<Bound>& bounds) {
  if (bounds.empty()) return;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], bounds[i].first, bounds[i].second);
}

// Counts evaluations and maps non-finite values to +inf.
class Counted {
 public:
  explicit Counted(const Objective& f) : f_(f) {}
  double operator()(std::span<const double> x) {
    ++evals;
    const double v = f_(x);
    return std::isfinite(v) ? v : kInf;
  }
  int evals = 0;

 private:
  const Objective& f_;
};

OptimResult nelder_mead_impl(Counted& f, std::vector<double> x0, const OptimOptions& opts,
                             int budget) {
  const std::size_t n = x0.size();
  if (n == 0) throw InvalidArgument("cannot optimize over zero variables");
  check_bounds(opts.bounds, n);
  clip(x0, opts.bounds);

  std::vector<std::vector<double>> sim(n + 1, x0);
  for (std::size_t k = 0; k < n; ++k) {
    const double step = x0[k] != 0.0 ? 0.05 * x0[k] : 0.00025;
    sim[k + 1][k] = x0[k] + step;
    clip(sim[k + 1], opts.bounds);
    if (sim[k + 1][k] == x0[k]) {
      sim[k + 1][k] = x0[k] - step;
      clip(sim[k + 1], opts.bounds);
    }
  }
  std::vector<double> fs(n + 1);
  const int start = f.evals;
  fs[0] = f(sim[0]);
  if (!std::isfinite(fs[0])) {
    throw InvalidArgument("non_finite_objective", "objective is not finite at the initial point");
  }
  for (std::size_t k = 1; k <= n; ++k) fs[k] = f(sim[k]);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = std::move(sim[order[i]]);
      f2[i] = fs[order[i]];
    }
    sim = std::move(s2);
    fs = std::move(f2);
  };
  sort_simplex();

  const double rho = 1.0, chi = 2.0, psi = 0.5, sigma = 0.5;
  std::vector<double> xbar(n), xr(n), xe(n), xc(n);
  auto combine = [&](std::vector<double>& out, double a, const std::vector<double>& w) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (1.0 + a) * xbar[i] - a * w[i];
    clip(out, opts.bounds);
  };

  bool converged = false;
  while (f.evals - start < budget) {
    double xspread = 0.0, fspread = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      fspread = std::max(fspread, std::abs(fs[k] - fs[0]));
      for (std::size_t i = 0; i < n; ++i) xspread = std::max(xspread, std::abs(sim[k][i] - sim[0][i]));
    }
    if (xspread <= opts.x_tol && fspread <= opts.f_tol) {
      converged = true;
      break;
    }

    std::fill(xbar.begin(), xbar.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) xbar[i] += sim[k][i];
    }
    for (double& v : xbar) v /= static_cast<double>(n);

    combine(xr, rho, sim[n]);
    const double fr = f(xr);
    bool shrink = false;
    if (fr < fs[0]) {
      combine(xe, rho * chi, sim[n]);
      const double fe = f(xe);
      if (fe < fr) {
        sim[n] = xe;
        fs[n] = fe;
      } else {
        sim[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      sim[n] = xr;
      fs[n] = fr;
    } else if (fr < fs[n]) {
      combine(xc, psi * rho, sim[n]);
      const double fc = f(xc);
      if (fc <= fr) {
        sim[n] = xc;
        fs[n] = fc;
      } else {
        shrink = true;
      }
    } else {
      combine(xc, -psi, sim[n]);
      const double fc = f(xc);
      if (fc < fs[n]) {
        sim[n] = xc;
        fs[n] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t i = 0; i < n; ++i) sim[k][i] = sim[0][i] + sigma * (sim[k][i] - sim[0][i]);
        fs[k] = f(sim[k]);
      }
    }
    sort_simplex();
  }
  return {sim[0], fs[0], f.evals - start, converged};
}

// Line search helpers for Powell. g(alpha) = f(p + alpha * d).
struct LineResult {
  double alpha;
  double value;
};

template <class G>
LineResult line_minimize(G& g, double f0, double x_tol) {
  constexpr double kGold = 1.618033988749895;
  constexpr double kGrowLimit = 1e6;
  // Bracket a minimum starting from alpha in {0, 1}.
  double a = 0.0, fa = f0;
  double b = 1.0, fb = g(b);
  if (fb > fa) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = b + kGold * (b - a);
  double fc = g(c);
  int guard = 0;
  while (fb > fc && guard++ < 200) {
    a = b;
    fa = fb;
    b = c;
    fb = fc;
    c = b + kGold * (b - a);
    if (std::abs(c) > kGrowLimit) break;
    fc = g(c);
  }
  if (fb > fc) return {c, fc};

  // Golden-section search on the bracket (a, b, c) with f(b) <= f(a), f(c).
  constexpr double r = 0.6180339887498949;
  constexpr double cgold = 1.0 - r;
  double x0 = a, x3 = c, x1, x2;
  if (std::abs(c - b) > std::abs(b - a)) {
    x1 = b;
    x2 = b + cgold * (c - b);
  } else {
    x2 = b;
    x1 = b - cgold * (b - a);
  }
  double f1 = g(x1), f2 = g(x2);
  const double tol = 1e-10;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(x3 - x0) <= tol * (std::abs(x1) + std::abs(x2)) + 0.1 * x_tol) break;
    if (f2 < f1) {
      x0 = x1;
      x1 = x2;
      x2 = r * x2 + cgold * x3;
      f1 = f2;
      f2 = g(x2);
    } else {
      x3 = x2;
      x2 = x1;
      x1 = r * x1 + cgold * x0;
      f2 = f1;
      f1 = g(x1);
    }
  }
  return f1 < f2 ? LineResult{x1, f1} : LineResult{x2, f2};
}

}  // namespace

OptimResult nelder_mead(const Objective& f, std::span<const double> x0, const OptimOptions& opts) {
  Counted counted(f);
  OptimResult best = nelder_mead_impl(counted, {x0.begin(), x0.end()}, opts, opts.max_evals);
  for (int r = 0; r < opts.restarts && counted.evals < opts.max_evals; ++r) {
    const OptimResult next =
        nelder_mead_impl(counted, best.x, opts, opts.max_evals - counted.evals);
    const bool improved = best.f - next.f > opts.f_tol * std::max(1.0, std::abs(best.f));
    if (next.f < best.f) {
      best.x = next.x;
      best.f = next.f;
      best.converged = next.converged;
    }
    if (!improved) break;
  }
  best.evals = counted.evals;
  return best;
}

OptimResult powell(const Objective& f, std::span<const double> x0, const OptimOptions& opts) {
  const std::size_t n = x0.size();
  if (n == 0) throw InvalidArgument("cannot optimize over zero variables");
  check_bounds(opts.bounds, n);
  Counted counted(f);
  std::vector<double> scratch(n);
  auto eval = [&](const std::vector<double>& x) {
    scratch = x;
    clip(scratch, opts.bounds);
    return counted(scratch);
  };

  std::vector<double> p(x0.begin(), x0.end());
  clip(p, opts.bounds);
  double fret = eval(p);
  if (!std::isfinite(fret)) {
    throw InvalidArgument("non_finite_objective", "objective is not finite at the initial point");
  }
  std::vector<std::vector<double>> dirs(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) dirs[i][i] = 1.0;

  std::vector<double> trial(n);
  auto search = [&](std::vector<double>& d) {
    auto g = [&](double alpha) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = p[i] + alpha * d[i];
      return eval(trial);
    };
    const LineResult lr = line_minimize(g, fret, opts.x_tol);
    if (lr.value < fret) {
      for (std::size_t i = 0; i < n; ++i) {
        d[i] *= lr.alpha;
        p[i] += d[i];
      }
      clip(p, opts.bounds);
      fret = lr.value;
    }
  };

  bool converged = false;
  std::vector<double> pt = p, ptt(n), xit(n);
  while (counted.evals < opts.max_evals) {
    const double fp = fret;
    std::size_t ibig = 0;
    double del = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double before = fret;
      search(dirs[i]);
      if (before - fret > del) {
        del = before - fret;
        ibig = i;
      }
    }
    double step = 0.0;
    for (std::size_t i = 0; i < n; ++i) step = std::max(step, std::abs(p[i] - pt[i]));
    if (2.0 * (fp - fret) <= opts.f_tol * (std::abs(fp) + std::abs(fret)) + 1e-300 ||
        (fp - fret <= opts.f_tol && step <= opts.x_tol)) {
      converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      ptt[i] = 2.0 * p[i] - pt[i];
      xit[i] = p[i] - pt[i];
      pt[i] = p[i];
    }
    const double fptt = eval(ptt);
    if (fptt < fp) {
      const double t = 2.0 * (fp - 2.0 * fret + fptt) * (fp - fret - del) * (fp - fret - del) -
                       del * (fp - fptt) * (fp - fptt);
      if (t < 0.0) {
        search(xit);
        dirs[ibig] = dirs[n - 1];
        dirs[n - 1] = xit;
      }
    }
  }
  return {p, fret, counted.evals, converged};
}

OptimResult differential_evolution(const Objective& f, const OptimOptions& opts) {
  if (opts.bounds.empty()) {
    throw InvalidArgument("missing_bounds", "differential evolution requires bounds");
  }
  const std::size_t dim = opts.bounds.size();
  check_bounds(opts.bounds, dim);
  const DeSettings& de = opts.de;
  if (de.population_multiplier < 1) throw InvalidArgument("population multiplier must be >= 1");
  if (!(de.mutation > 0.0 && de.mutation <= 2.0)) throw InvalidArgument("F must be in (0, 2]");
  if (!(de.crossover >= 0.0 && de.crossover <= 1.0)) throw InvalidArgument("CR must be in [0, 1]");

  const std::size_t np =
      std::max<std::size_t>(5, static_cast<std::size_t>(de.population_multiplier) * dim);
  Counted counted(f);
  std::mt19937_64 rng(de.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_in = [&](std::size_t j) {
    const auto [lo, hi] = opts.bounds[j];
    return lo + (hi - lo) * unit(rng);
  };

  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  std::vector<double> fit(np);
  for (auto& member : pop) {
    for (std::size_t j = 0; j < dim; ++j) member[j] = uniform_in(j);
  }
  for (std::size_t i = 0; i < np; ++i) fit[i] = counted(pop[i]);

  const std::size_t generations =
      std::max<std::size_t>(1, static_cast<std::size_t>(opts.max_evals) / np);
  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);
  std::vector<std::vector<double>> trials(np, std::vector<double>(dim));
  bool converged = false;

  for (std::size_t gen = 1; gen < generations; ++gen) {
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t jrand = pick_dim(rng);
      auto& trial = trials[i];
      for (std::size_t j = 0; j < dim; ++j) {
        if (j == jrand || unit(rng) < de.crossover) {
          trial[j] = pop[r1][j] + de.mutation * (pop[r2][j] - pop[r3][j]);
          if (trial[j] < opts.bounds[j].first || trial[j] > opts.bounds[j].second) {
            trial[j] = uniform_in(j);
          }
        } else {
          trial[j] = pop[i][j];
        }
      }
    }
    for (std::size_t i = 0; i < np; ++i) {
      const double ft = counted(trials[i]);
      if (ft <= fit[i]) {
        pop[i] = trials[i];
        fit[i] = ft;
      }
    }
    const double mean = std::accumulate(fit.begin(), fit.end(), 0.0) / static_cast<double>(np);
    double var = 0.0;
    for (double v : fit) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(np));
    if (std::isfinite(mean) && sd <= opts.f_tol + de.rel_tol * std::abs(mean)) {
      converged = true;
      break;
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
  OptimResult out{pop[best], fit[best], 0, converged};
  if (de.polish && std::isfinite(out.f)) {
    const OptimResult polished = nelder_mead_impl(counted, out.x, opts, de.polish_evals);
    if (polished.f < out.f) {
      out.x = polished.x;
      out.f = polished.f;
    }
  }
  out.evals = counted.evals;
  return out;
}

OptimResult minimize(OptimizerKind kind, const Objective& f, std::span<const double> x0,
                     const OptimOptions& opts) {
  switch (kind) {
    case OptimizerKind::NelderMead:
      return nelder_mead(f, x0, opts);
    case OptimizerKind::Powell:
      return powell(f, x0, opts);
    case OptimizerKind::DifferentialEvolution:
      return differential_evolution(f, opts);
  }
  return nelder_mead(f, x0, opts);
}

}  // namespace paramflux
