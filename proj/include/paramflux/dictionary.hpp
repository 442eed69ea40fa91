#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace paramflux {

enum class AtomFamily {
  Sinusoid,      // sin(omega * t + phi), theta = (omega, phi)
  Power,         // t^b,                  theta = (b)
  StretchedExp,  // exp(b * t^c),         theta = (b, c)
  Constant,      // 1
};

using Interval = std::pair<double, double>;

/// One dictionary column f_i(theta_i, t).
struct Atom {
  AtomFamily family = AtomFamily::Constant;
  std::vector<double> theta;
  std::vector<Interval> theta_bounds;

  /// Atom of `family` with theta at the midpoint of `bounds`.
  static Atom at_midpoint(AtomFamily family, std::vector<Interval> bounds);

  double value(double t) const;
  std::size_t theta_count() const { return theta.size(); }
  std::string label() const;  // e.g. "sin(3.00*t + -1.00)"
};

std::size_t theta_arity(AtomFamily family);
std::string family_name(AtomFamily family);
AtomFamily family_from_name(const std::string& name);

/// Clamps theta into the atom's bounds.
void clamp_theta(Atom& atom);

/// A fitted weighted sum of atoms; the reconstructed continuous parameter curve.
struct SparseFit {
  std::vector<Atom> atoms;
  std::vector<double> weights;
  double lambda = 0.0;
  double residual = 0.0;                  // ||p - D w||_2 at the samples
  std::vector<double> objective_history;  // penalized objective after each round
  double prune_threshold = 1e-6;

  double eval(double t) const;

  /// Index of the atom with the largest RMS contribution over `tgrid`.
  std::size_t dominant_atom(std::span<const double> tgrid) const;
  /// Number of atoms whose weight survives pruning (the l0 count).
  std::size_t active_count() const;
  /// Human-readable form with pruned atoms folded into an epsilon term,
  /// e.g. "0.97*sin(3.00*t + 11.5) + eps".
  std::string to_string() const;
};

/// Phase wrapped into (-pi, pi].
double wrap_phase(double phi);

}  // namespace paramflux
