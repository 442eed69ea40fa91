#pragma once

#include <string>
#include <vector>

#include "paramflux/integrate.hpp"

namespace paramflux {

/// A registered example system with its ground truth.
struct BuiltinSystem {
  ModelSpec model;
  ParamSchedule truth;
  std::vector<double> x0;
  std::vector<double> tgrid;
  IntegratorChoice generator;  // used to synthesize reference data
};

/// One of: pvts, gene, gene_nonuniform, heat_mol, advdiff_mol.
BuiltinSystem builtin_model(const std::string& name);
std::vector<std::string> builtin_names();

/// Reference trajectory of a builtin system (noise-free).
TimeSeries generate_data(const BuiltinSystem& system);

/// `count` evenly spaced points on [lo, hi], both ends included.
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace paramflux
