#include "paramflux/timeseries.hpp"

#include <cmath>

#include "paramflux/error.hpp"

namespace paramflux {

void TimeSeries::validate() const {
  const std::size_t n = t.size();
  if (n < 2) throw InvalidArgument("time series needs at least 2 samples");
  if (static_cast<std::size_t>(X.cols()) != n) {
    throw InvalidArgument("time series has " + std::to_string(X.cols()) + " columns but " +
                          std::to_string(n) + " time stamps");
  }
  if (X.rows() < 1) throw InvalidArgument("time series has no states");
  if (!names.empty() && names.size() != static_cast<std::size_t>(X.rows())) {
    throw InvalidArgument("time series state-name count does not match rows");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(t[j])) throw InvalidArgument("non-finite time stamp");
    if (j > 0 && !(t[j] > t[j - 1])) {
      throw InvalidArgument("time stamps must be strictly increasing (index " +
                            std::to_string(j) + ")");
    }
  }
  if (!X.allFinite()) throw InvalidArgument("time series contains non-finite values");
}

std::vector<double> TimeSeries::row(std::size_t state) const {
  std::vector<double> out(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) out[static_cast<std::size_t>(j)] = X(state, j);
  return out;
}

}  // namespace paramflux
