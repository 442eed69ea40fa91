#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace paramflux {

/// Sampled trajectory: `X` holds one row per state and one column per time stamp.
struct TimeSeries {
  std::vector<double> t;
  Eigen::MatrixXd X;
  std::vector<std::string> names;  // optional; empty or one per row

  std::size_t states() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t samples() const { return t.size(); }

  /// Throws InvalidArgument unless t is strictly increasing with N >= 2,
  /// X is m x N and every entry is finite.
  void validate() const;

  std::vector<double> row(std::size_t state) const;
};

}  // namespace paramflux
