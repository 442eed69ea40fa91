#include "paramflux/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "paramflux/error.hpp"

namespace paramflux {

std::size_t theta_arity(AtomFamily family) {
  switch (family) {
    case AtomFamily::Sinusoid:
      return 2;
    case AtomFamily::Power:
      return 1;
    case AtomFamily::StretchedExp:
      return 2;
    case AtomFamily::Constant:
      return 0;
  }
  return 0;
}

std::string family_name(AtomFamily family) {
  switch (family) {
    case AtomFamily::Sinusoid:
      return "sinusoid";
    case AtomFamily::Power:
      return "power";
    case AtomFamily::StretchedExp:
      return "stretched_exp";
    case AtomFamily::Constant:
      return "constant";
  }
  return "?";
}

AtomFamily family_from_name(const std::string& name) {
  if (name == "sinusoid" || name == "sin") return AtomFamily::Sinusoid;
  if (name == "power") return AtomFamily::Power;
  if (name == "stretched_exp" || name == "stretched_exponential") return AtomFamily::StretchedExp;
  if (name == "constant") return AtomFamily::Constant;
  throw InvalidArgument("unknown atom family '" + name +
                        "' (valid: sinusoid, power, stretched_exp, constant)");
}

Atom Atom::at_midpoint(AtomFamily family, std::vector<Interval> bounds) {
  if (bounds.size() != theta_arity(family)) {
    throw InvalidArgument(family_name(family) + " atom needs " +
                          std::to_string(theta_arity(family)) + " theta bounds");
  }
  Atom a;
  a.family = family;
  for (const auto& [lo, hi] : bounds) {
    if (!(lo <= hi)) throw InvalidArgument("theta bound has lo > hi");
    a.theta.push_back(0.5 * (lo + hi));
  }
  a.theta_bounds = std::move(bounds);
  return a;
}

double Atom::value(double t) const {
  switch (family) {
    case AtomFamily::Sinusoid:
      return std::sin(theta[0] * t + theta[1]);
    case AtomFamily::Power:
      return std::pow(t, theta[0]);
    case AtomFamily::StretchedExp:
      return std::exp(theta[0] * std::pow(t, theta[1]));
    case AtomFamily::Constant:
      return 1.0;
  }
  return 0.0;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string Atom::label() const {
  switch (family) {
    case AtomFamily::Sinusoid: {
      const double phi = theta[1];
      return "sin(" + fmt("%.2f", theta[0]) + "*t " + (phi < 0 ? "- " : "+ ") +
             fmt("%.2f", std::abs(phi)) + ")";
    }
    case AtomFamily::Power:
      return "t^" + fmt("%.3g", theta[0]);
    case AtomFamily::StretchedExp:
      return "exp(" + fmt("%.3g", theta[0]) + "*t^" + fmt("%.3g", theta[1]) + ")";
    case AtomFamily::Constant:
      return "1";
  }
  return "?";
}

void clamp_theta(Atom& atom) {
  for (std::size_t i = 0; i < atom.theta.size() && i < atom.theta_bounds.size(); ++i) {
    atom.theta[i] = std::clamp(atom.theta[i], atom.theta_bounds[i].first,
                               atom.theta_bounds[i].second);
  }
}

double wrap_phase(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(phi, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

double SparseFit::eval(double t) const {
  double s = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (weights[i] != 0.0) s += weights[i] * atoms[i].value(t);
  }
  return s;
}

std::size_t SparseFit::dominant_atom(std::span<const double> tgrid) const {
  std::size_t best = 0;
  double best_rms = -1.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    double ss = 0.0;
    for (double t : tgrid) {
      const double v = weights[i] * atoms[i].value(t);
      ss += v * v;
    }
    const double rms = tgrid.empty() ? std::abs(weights[i]) : std::sqrt(ss / tgrid.size());
    if (rms > best_rms) {
      best_rms = rms;
      best = i;
    }
  }
  return best;
}

std::size_t SparseFit::active_count() const {
  return static_cast<std::size_t>(std::count_if(
      weights.begin(), weights.end(), [&](double w) { return std::abs(w) >= prune_threshold; }));
}

std::string SparseFit::to_string() const {
  std::string out;
  bool has_eps = false;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    if (std::abs(w) < prune_threshold) {
      has_eps = true;
      continue;
    }
    if (!out.empty()) out += w < 0 ? " - " : " + ";
    else if (w < 0) out += "-";
    const std::string mag = fmt("%.3g", std::abs(w));
    if (atoms[i].family == AtomFamily::Constant) {
      out += mag;
    } else {
      out += mag + "*" + atoms[i].label();
    }
  }
  if (out.empty()) out = "0";
  if (has_eps) out += " + eps";
  return out;
}

}  // namespace paramflux
