#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "paramflux/timeseries.hpp"

namespace paramflux {

enum class CostKind { L2, L1, Ar };

/// Segment cost model for binary segmentation.
struct CostFn {
  CostKind kind = CostKind::L2;
  int order = 1;  // AR order, ignored otherwise

  static CostFn l2() { return {CostKind::L2, 0}; }
  static CostFn l1() { return {CostKind::L1, 0}; }
  static CostFn ar(int order = 1) { return {CostKind::Ar, order}; }

  /// Shortest segment the cost is defined on.
  std::size_t min_length() const;
  std::string name() const;
};

CostFn cost_from_name(const std::string& name, int order = 1);

/// Cost of signal[lo, hi).
///  l2: sum of squared deviations from the mean
///  l1: sum of absolute deviations from the median
///  ar(q): residual sum of squares of x_k ~ c + a_1 x_{k-1} + ... + a_q x_{k-q}
double segment_cost(std::span<const double> signal, std::size_t lo, std::size_t hi,
                    const CostFn& cost);

struct Split {
  std::size_t index = 0;  // first sample of the right-hand segment
  double gain = 0.0;
};

/// Split of [lo, hi) maximizing cost(lo,hi) - cost(lo,s) - cost(s,hi) with both
/// pieces at least `min_len` long (0 means the cost's own minimum). Ties go to
/// the smallest s.
Split best_split(std::span<const double> signal, std::size_t lo, std::size_t hi,
                 const CostFn& cost, std::size_t min_len = 0);

struct NoiseLevel {
  double sigma = 1.0;
};
struct FixedCount {
  std::size_t count = 0;
};

struct DetectConfig {
  std::variant<NoiseLevel, FixedCount> mode = NoiseLevel{};
  std::size_t s_g = 1;
  CostFn cost = CostFn::ar(1);
  double penalty_multiplier = 2.0;  // tau = multiplier * sigma^2 * ln(N)
  /// FixedCount only: when false, a merged list longer than the requested count
  /// is trimmed to the switches with the largest relative gain instead of failing.
  bool strict_count = true;
};

/// Per-split acceptance threshold in NoiseLevel mode.
double split_threshold(double sigma, std::size_t n, double multiplier = 2.0);

/// Greedy binary segmentation of one signal; returns sorted split indices.
std::vector<std::size_t> binseg_single(std::span<const double> signal, const DetectConfig& cfg);

struct SwitchSet {
  std::vector<std::size_t> indices;
  std::vector<double> times;
  std::map<std::size_t, std::vector<std::size_t>> per_state;

  std::size_t count() const { return indices.size(); }
};

/// Switch set from explicit indices into `t`; validates ordering and range.
SwitchSet make_switch_set(std::span<const double> t, std::vector<std::size_t> indices);

/// Per-state binary segmentation, gap filter, union over states, gap filter.
SwitchSet detect_switches(const TimeSeries& data, const DetectConfig& cfg);

/// Keeps an index only if it exceeds the previously kept one by more than s_g.
std::vector<std::size_t> apply_gap(const std::vector<std::size_t>& sorted, std::size_t s_g);

}  // namespace paramflux
