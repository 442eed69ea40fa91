#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "paramflux/dictionary.hpp"
#include "paramflux/fit.hpp"

namespace paramflux {

/// Parameter values fitted on a dense uniform partition of the data.
struct IntervalSamples {
  std::vector<std::size_t> boundaries;     // 0 = b_0 < ... < b_K = N
  std::vector<double> midtimes;            // (t[lo] + t[hi-1]) / 2 per interval
  std::vector<std::vector<double>> values;  // K x n_p
  std::vector<double> static_values;
  ParamSchedule schedule = ParamSchedule::constant(0.0, 1.0, {});  // step function of the samples
  int evals = 0;

  /// Column of parameter `index` across intervals.
  std::vector<double> param(std::size_t index) const;
};

/// floor(n / 6) contiguous intervals; the remainder goes one extra sample to
/// each leading interval. Returns the K + 1 boundaries.
std::vector<std::size_t> uniform_partition(std::size_t n);

/// Fits each interval of the uniform partition (static parameters jointly).
IntervalSamples sample_parameters(const ModelSpec& model, const TimeSeries& data,
                                  const FitConfig& cfg);

/// |tgrid| x r matrix whose column i is atom i evaluated on tgrid.
Eigen::MatrixXd eval_dictionary(const std::vector<Atom>& atoms, std::span<const double> tgrid);

double soft_threshold(double x, double lambda);

struct LassoOptions {
  double tol = 1e-8;       // max weight change per sweep
  int max_sweeps = 10000;
};

/// Lasso by cyclic coordinate descent on the column-normalized design Dn:
/// v = argmin 0.5 ||p - Dn v||^2 + lambda ||v||_1, returned as w_j = v_j / ||d_j||.
std::vector<double> lasso_weights(const Eigen::MatrixXd& D, std::span<const double> p,
                                  double lambda, const LassoOptions& opts = {});

struct SparseConfig {
  double lambda = 0.01;
  int max_rounds = 50;
  double tol = 1e-8;            // stop when a round improves the objective less than this
  double prune_threshold = 1e-6;
  int theta_evals = 4000;       // Nelder-Mead budget per theta step
  /// Alternation runs: the atoms' own theta first, then Halton points of the
  /// theta box. The run with the lowest final objective is kept.
  int starts = 16;
  /// Refit the weights of the surviving atoms by least squares at the final theta.
  bool debias = true;
  LassoOptions lasso;
};

/// Sinusoid, power, stretched exponential and constant atoms with theta at the
/// midpoint of their default bounds.
std::vector<Atom> default_dictionary();

/// Alternating minimization of 0.5 ||p - D_theta w||^2 + lambda sum_j ||d_j|| |w_j|:
/// lasso for w, then Nelder-Mead over the theta of atoms with nonzero weight.
SparseFit sparse_fit(std::span<const double> times, std::span<const double> samples,
                     std::vector<Atom> atoms, const SparseConfig& cfg);

}  // namespace paramflux
