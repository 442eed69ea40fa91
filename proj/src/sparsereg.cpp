#include "paramflux/sparsereg.hpp"

#include <cmath>
#include <numbers>

#include "paramflux/error.hpp"

namespace paramflux {

std::vector<double> IntervalSamples::param(std::size_t index) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v.at(index));
  return out;
}

std::vector<std::size_t> uniform_partition(std::size_t n) {
  if (n < 12) throw InvalidArgument("dense segmentation needs at least 12 samples");
  const std::size_t k = n / 6;
  const std::size_t base = n / k, extra = n % k;
  std::vector<std::size_t> b{0};
  for (std::size_t i = 0; i < k; ++i) b.push_back(b.back() + base + (i < extra ? 1 : 0));
  return b;
}

IntervalSamples sample_parameters(const ModelSpec& model, const TimeSeries& data,
                                  const FitConfig& cfg) {
  const auto b = uniform_partition(data.samples());
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    if (b[i + 1] - b[i] < 2) throw InvalidArgument("interval_too_short", "interval has < 2 samples");
  }
  const SwitchSet cuts = make_switch_set(data.t, std::vector<std::size_t>(b.begin() + 1, b.end() - 1));
  const FitResult fit = fit_piecewise(model, data, cuts, cfg);

  IntervalSamples out;
  out.boundaries = b;
  out.values = fit.segment_values;
  out.static_values = fit.static_values;
  out.schedule = fit.schedule;
  out.evals = fit.evals;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    out.midtimes.push_back(0.5 * (data.t[b[i]] + data.t[b[i + 1] - 1]));
  }
  return out;
}

Eigen::MatrixXd eval_dictionary(const std::vector<Atom>& atoms, std::span<const double> tgrid) {
  if (atoms.empty()) throw InvalidArgument("dictionary has no atoms");
  Eigen::MatrixXd D(static_cast<Eigen::Index>(tgrid.size()), static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    for (std::size_t i = 0; i < tgrid.size(); ++i) {
      const double v = atoms[j].value(tgrid[i]);
      if (!std::isfinite(v)) {
        throw InvalidArgument("non_finite_atom", "atom " + atoms[j].label() +
                                                     " is not finite at t = " +
                                                     std::to_string(tgrid[i]));
      }
      D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return D;
}

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

std::vector<double> lasso_weights(const Eigen::MatrixXd& D, std::span<const double> p,
                                  double lambda, const LassoOptions& opts) {
  if (static_cast<std::size_t>(D.rows()) != p.size()) {
    throw InvalidArgument("dictionary has " + std::to_string(D.rows()) + " rows but " +
                          std::to_string(p.size()) + " samples");
  }
  if (lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  const Eigen::Index r = D.cols();
  Eigen::VectorXd norms = D.colwise().norm();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (!(norms(j) > 0.0)) {
      throw InvalidArgument("zero_column", "dictionary column " + std::to_string(j) + " is all zero");
    }
  }
  // Lasso on the normalized design, v_j = ||d_j|| w_j.
  const Eigen::MatrixXd Dn = D * norms.cwiseInverse().asDiagonal();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(r);
  Eigen::VectorXd resid = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < r; ++j) {
      const double rho = Dn.col(j).dot(resid) + v(j);
      const double next = soft_threshold(rho, lambda);
      const double delta = next - v(j);
      if (delta != 0.0) {
        resid -= delta * Dn.col(j);
        v(j) = next;
      }
      max_change = std::max(max_change, std::abs(delta) / norms(j));
    }
    if (max_change < opts.tol) break;
  }
  std::vector<double> w(static_cast<std::size_t>(r));
  for (Eigen::Index j = 0; j < r; ++j) w[static_cast<std::size_t>(j)] = v(j) / norms(j);
  return w;
}

std::vector<Atom> default_dictionary() {
  return {
      Atom::at_midpoint(AtomFamily::Sinusoid, {{0.5, 2.0 * std::numbers::pi}, {-std::numbers::pi, std::numbers::pi}}),
      Atom::at_midpoint(AtomFamily::Power, {{0.1, 3.0}}),
      Atom::at_midpoint(AtomFamily::StretchedExp, {{-3.0, 1.0}, {0.2, 2.0}}),
      Atom::at_midpoint(AtomFamily::Constant, {}),
  };
}

namespace {

double residual_norm(const Eigen::MatrixXd& D, std::span<const double> p,
                     const std::vector<double>& w) {
  double ss = 0.0;
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    double s = p[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < D.cols(); ++j) s -= D(i, j) * w[static_cast<std::size_t>(j)];
    ss += s * s;
  }
  return std::sqrt(ss);
}

// The lasso objective in normalized coordinates: 0.5 ||r||^2 + lambda sum ||d_j|| |w_j|.
double penalized(const Eigen::MatrixXd& D, double resid, const std::vector<double>& w, double lambda) {
  double l1 = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) l1 += D.col(static_cast<Eigen::Index>(j)).norm() * std::abs(w[j]);
  return 0.5 * resid * resid + lambda * l1;
}

}  // namespace

namespace {

/// Radical inverse of `index` in `base` (van der Corput), in [0, 1).
double radical_inverse(std::size_t index, std::size_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

/// One alternation run from the given atoms.
SparseFit alternate(std::span<const double> times, std::span<const double> samples,
                    std::vector<Atom> atoms, const SparseConfig& cfg) {
  SparseFit fit;
  fit.atoms = std::move(atoms);
  fit.lambda = cfg.lambda;
  fit.prune_threshold = cfg.prune_threshold;
  Eigen::MatrixXd D = eval_dictionary(fit.atoms, times);
  fit.weights = lasso_weights(D, samples, cfg.lambda, cfg.lasso);
  double J = penalized(D, residual_norm(D, samples, fit.weights), fit.weights, cfg.lambda);
  fit.objective_history.push_back(J);

  for (int round = 0; round < cfg.max_rounds; ++round) {
    // theta step over the active atoms, weights fixed
    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (atom, theta index)
    std::vector<double> z0;
    OptimOptions opts;
    for (std::size_t a = 0; a < fit.atoms.size(); ++a) {
      if (std::abs(fit.weights[a]) <= cfg.prune_threshold) continue;
      for (std::size_t k = 0; k < fit.atoms[a].theta.size(); ++k) {
        slots.emplace_back(a, k);
        z0.push_back(fit.atoms[a].theta[k]);
        opts.bounds.push_back(fit.atoms[a].theta_bounds[k]);
      }
    }
    std::vector<Atom> trial_atoms = fit.atoms;
    if (!slots.empty()) {
      opts.max_evals = cfg.theta_evals;
      opts.f_tol = 1e-14;
      opts.x_tol = 1e-10;
      auto objective = [&](std::span<const double> z) {
        for (std::size_t s = 0; s < slots.size(); ++s) {
          trial_atoms[slots[s].first].theta[slots[s].second] = z[s];
        }
        double ss = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
          double v = samples[i];
          for (std::size_t a = 0; a < trial_atoms.size(); ++a) {
            if (fit.weights[a] != 0.0) v -= fit.weights[a] * trial_atoms[a].value(times[i]);
          }
          ss += v * v;
        }
        return std::sqrt(ss);
      };
      const OptimResult r = nelder_mead(objective, z0, opts);
      for (std::size_t s = 0; s < slots.size(); ++s) {
        trial_atoms[slots[s].first].theta[slots[s].second] = r.x[s];
      }
    }

    // w step at the new theta
    Eigen::MatrixXd Dn;
    try {
      Dn = eval_dictionary(trial_atoms, times);
    } catch (const InvalidArgument&) {
      break;
    }
    std::vector<double> w = lasso_weights(Dn, samples, cfg.lambda, cfg.lasso);
    const double Jn = penalized(Dn, residual_norm(Dn, samples, w), w, cfg.lambda);
    if (!(Jn <= J)) break;
    fit.atoms = std::move(trial_atoms);
    fit.weights = std::move(w);
    D = std::move(Dn);
    const double improvement = J - Jn;
    J = Jn;
    fit.objective_history.push_back(J);
    if (improvement < cfg.tol) break;
  }
  fit.residual = residual_norm(D, samples, fit.weights);
  return fit;
}

}  // namespace

SparseFit sparse_fit(std::span<const double> times, std::span<const double> samples,
                     std::vector<Atom> atoms, const SparseConfig& cfg) {
  if (times.size() != samples.size()) throw InvalidArgument("times and samples differ in length");
  if (samples.size() < 2) throw InvalidArgument("sparse fit needs at least 2 samples");
  if (cfg.starts < 1) throw InvalidArgument("sparse fit needs at least one start");
  for (auto& a : atoms) {
    if (a.theta.size() != theta_arity(a.family) || a.theta_bounds.size() != a.theta.size()) {
      throw InvalidArgument("atom " + family_name(a.family) + " has malformed theta");
    }
    clamp_theta(a);
  }

  // Start 0 is the given theta; further starts are Halton points of the theta box.
  SparseFit best = alternate(times, samples, atoms, cfg);
  for (int s = 1; s < cfg.starts; ++s) {
    std::vector<Atom> start = atoms;
    std::size_t d = 0;
    for (auto& a : start) {
      for (std::size_t k = 0; k < a.theta.size(); ++k, ++d) {
        const auto [lo, hi] = a.theta_bounds[k];
        const double u = radical_inverse(static_cast<std::size_t>(s), kPrimes[d % std::size(kPrimes)]);
        a.theta[k] = lo + u * (hi - lo);
      }
    }
    SparseFit trial;
    try {
      trial = alternate(times, samples, std::move(start), cfg);
    } catch (const InvalidArgument&) {
      continue;  // a start where some atom is not finite on the samples
    }
    if (trial.objective_history.back() < best.objective_history.back()) best = std::move(trial);
  }

  if (cfg.debias) {
    // Least-squares weights on the surviving atoms; pruned atoms keep their values.
    const Eigen::MatrixXd D = eval_dictionary(best.atoms, times);
    std::vector<Eigen::Index> support;
    Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(samples.data(), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t j = 0; j < best.weights.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (std::abs(best.weights[j]) > cfg.prune_threshold) {
        support.push_back(jj);
      } else {
        target -= best.weights[j] * D.col(jj);
      }
    }
    if (!support.empty()) {
      const Eigen::MatrixXd Ds = D(Eigen::all, support);
      const auto qr = Ds.colPivHouseholderQr();
      if (qr.rank() == static_cast<Eigen::Index>(support.size())) {
        const Eigen::VectorXd ws = qr.solve(target);
        if (ws.allFinite()) {
          for (std::size_t k = 0; k < support.size(); ++k) {
            best.weights[static_cast<std::size_t>(support[k])] = ws(static_cast<Eigen::Index>(k));
          }
          best.residual = residual_norm(D, samples, best.weights);
        }
      }
    }
  }

  for (auto& a : best.atoms) {
    if (a.family == AtomFamily::Sinusoid) a.theta[1] = wrap_phase(a.theta[1]);
  }
  return best;
}

}  // namespace paramflux
