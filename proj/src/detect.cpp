#include "paramflux/detect.hpp"

#include <algorithm>
#include <cmath>

#include "paramflux/error.hpp"

namespace paramflux {

std::size_t CostFn::min_length() const {
  return kind == CostKind::Ar ? static_cast<std::size_t>(order) + 2 : 2;
}

std::string CostFn::name() const {
  switch (kind) {
    case CostKind::L2:
      return "l2";
    case CostKind::L1:
      return "l1";
    case CostKind::Ar:
      return "ar";
  }
  return "l2";
}

CostFn cost_from_name(const std::string& name, int order) {
  if (name == "l2") return CostFn::l2();
  if (name == "l1") return CostFn::l1();
  if (name == "ar") {
    if (order < 1) throw InvalidArgument("AR order must be >= 1");
    return CostFn::ar(order);
  }
  throw InvalidArgument("unknown cost '" + name + "' (valid: l2, l1, ar)");
}

namespace {

// Least squares by sequential Givens rotations. Rows are absorbed one at a time
// and the residual sum of squares grows by the square of each row's leftover,
// so no normal equations are formed.
class RowwiseLeastSquares {
 public:
  explicit RowwiseLeastSquares(std::size_t unknowns)
      : p_(unknowns), r_(unknowns * (unknowns + 1), 0.0), row_(unknowns + 1) {}

  // `features` has p entries; `target` is the response.
  template <class Features>
  void add(const Features& features, double target) {
    for (std::size_t k = 0; k < p_; ++k) row_[k] = features(k);
    row_[p_] = target;
    const std::size_t w = p_ + 1;
    for (std::size_t j = 0; j < p_; ++j) {
      const double a = row_[j];
      if (a == 0.0) continue;
      const double d = r_[j * w + j];
      const double r = std::hypot(d, a);
      const double c = d / r;
      const double s = a / r;
      r_[j * w + j] = r;
      for (std::size_t k = j + 1; k < w; ++k) {
        const double rk = r_[j * w + k];
        const double ak = row_[k];
        r_[j * w + k] = c * rk + s * ak;
        row_[k] = c * ak - s * rk;
      }
    }
    rss_ += row_[p_] * row_[p_];
  }

  double rss() const { return rss_; }

 private:
  std::size_t p_;
  std::vector<double> r_;  // p x (p+1): upper-triangular R plus rotated target
  std::vector<double> row_;
  double rss_ = 0.0;
};

void check_range(std::span<const double> signal, std::size_t lo, std::size_t hi,
                 const CostFn& cost) {
  if (hi > signal.size() || lo >= hi) throw InvalidArgument("invalid segment range");
  if (hi - lo < cost.min_length()) {
    throw InvalidArgument("segment_too_short", "segment of length " + std::to_string(hi - lo) +
                                                   " is shorter than the " + cost.name() +
                                                   " minimum of " +
                                                   std::to_string(cost.min_length()));
  }
}

double l2_cost(std::span<const double> x, std::size_t lo, std::size_t hi) {
  double mean = 0.0;
  for (std::size_t i = lo; i < hi; ++i) mean += x[i];
  mean /= static_cast<double>(hi - lo);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += (x[i] - mean) * (x[i] - mean);
  return s;
}

double l1_cost(std::span<const double> x, std::size_t lo, std::size_t hi) {
  std::vector<double> v(x.begin() + static_cast<std::ptrdiff_t>(lo),
                        x.begin() + static_cast<std::ptrdiff_t>(hi));
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  double median = v[n / 2];
  if (n % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
    median = 0.5 * (median + lower);
  }
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += std::abs(x[i] - median);
  return s;
}

// Features of the AR row predicting x[k]: intercept, x[k-1], ..., x[k-q].
struct ArRow {
  std::span<const double> x;
  std::size_t k;
  double operator()(std::size_t j) const { return j == 0 ? 1.0 : x[k - j]; }
};

double ar_cost(std::span<const double> x, std::size_t lo, std::size_t hi, int order) {
  const auto q = static_cast<std::size_t>(order);
  RowwiseLeastSquares ls(q + 1);
  for (std::size_t k = lo + q; k < hi; ++k) ls.add(ArRow{x, k}, x[k]);
  return ls.rss();
}

// left[s - lo] = cost(lo, s), right[s - lo] = cost(s, hi) for s in [lo, hi].
void prefix_costs(std::span<const double> x, std::size_t lo, std::size_t hi, const CostFn& cost,
                  std::vector<double>& left, std::vector<double>& right) {
  const std::size_t len = hi - lo;
  left.assign(len + 1, 0.0);
  right.assign(len + 1, 0.0);
  if (cost.kind == CostKind::L2) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double v = x[lo + i];
      const double delta = v - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (v - mean);
      left[i + 1] = m2;
    }
    mean = 0.0;
    m2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double v = x[hi - 1 - i];
      const double delta = v - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (v - mean);
      right[len - 1 - i] = m2;
    }
  } else if (cost.kind == CostKind::Ar) {
    const auto q = static_cast<std::size_t>(cost.order);
    RowwiseLeastSquares fwd(q + 1);
    for (std::size_t s = lo + 1; s <= hi; ++s) {
      const std::size_t k = s - 1;
      if (k >= lo + q) fwd.add(ArRow{x, k}, x[k]);
      left[s - lo] = fwd.rss();
    }
    RowwiseLeastSquares bwd(q + 1);
    for (std::size_t s = hi; s-- > lo;) {
      const std::size_t k = s + q;
      if (k < hi) bwd.add(ArRow{x, k}, x[k]);
      right[s - lo] = bwd.rss();
    }
  } else {
    for (std::size_t s = lo + 2; s <= hi; ++s) left[s - lo] = l1_cost(x, lo, s);
    for (std::size_t s = lo; s + 2 <= hi; ++s) right[s - lo] = l1_cost(x, s, hi);
  }
}

struct Candidate {
  Split split;
  double relative_gain = 0.0;
};

std::vector<Candidate> binseg_detail(std::span<const double> signal, const DetectConfig& cfg) {
  const std::size_t n = signal.size();
  const std::size_t min_len = std::max(cfg.s_g, cfg.cost.min_length());
  const auto* fixed = std::get_if<FixedCount>(&cfg.mode);
  const std::size_t target = fixed ? fixed->count : 0;
  double tau = 0.0;
  if (const auto* noise = std::get_if<NoiseLevel>(&cfg.mode)) {
    tau = split_threshold(noise->sigma, n, cfg.penalty_multiplier);
  }

  std::vector<Candidate> accepted;
  if (fixed && target == 0) return accepted;
  if (n < 2 * min_len) {
    if (fixed) {
      throw InvalidArgument("infeasible", "signal of length " + std::to_string(n) +
                                              " cannot hold " + std::to_string(target) +
                                              " splits with minimum segment length " +
                                              std::to_string(min_len));
    }
    return accepted;
  }
  const double total = segment_cost(signal, 0, n, cfg.cost);

  struct Segment {
    std::size_t lo, hi;
    bool splittable;
    Split best;
  };
  auto make_segment = [&](std::size_t lo, std::size_t hi) {
    Segment seg{lo, hi, hi - lo >= 2 * min_len, {}};
    if (seg.splittable) seg.best = best_split(signal, lo, hi, cfg.cost, min_len);
    return seg;
  };

  std::vector<Segment> segments{make_segment(0, n)};
  while (true) {
    if (fixed && accepted.size() == target) break;
    std::ptrdiff_t pick = -1;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (!segments[i].splittable) continue;
      if (pick < 0 || segments[i].best.gain > segments[static_cast<std::size_t>(pick)].best.gain) {
        pick = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (pick < 0) {
      if (fixed) {
        throw InvalidArgument("infeasible", "only " + std::to_string(accepted.size()) + " of " +
                                                std::to_string(target) +
                                                " splits fit with minimum segment length " +
                                                std::to_string(min_len));
      }
      break;
    }
    const Segment seg = segments[static_cast<std::size_t>(pick)];
    if (!fixed && !(seg.best.gain > tau)) break;
    accepted.push_back({seg.best, total > 0.0 ? seg.best.gain / total : 0.0});
    segments[static_cast<std::size_t>(pick)] = make_segment(seg.lo, seg.best.index);
    segments.insert(segments.begin() + pick + 1, make_segment(seg.best.index, seg.hi));
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Candidate& a, const Candidate& b) { return a.split.index < b.split.index; });
  return accepted;
}

}  // namespace

double segment_cost(std::span<const double> signal, std::size_t lo, std::size_t hi,
                    const CostFn& cost) {
  check_range(signal, lo, hi, cost);
  switch (cost.kind) {
    case CostKind::L2:
      return l2_cost(signal, lo, hi);
    case CostKind::L1:
      return l1_cost(signal, lo, hi);
    case CostKind::Ar:
      return ar_cost(signal, lo, hi, cost.order);
  }
  return 0.0;
}

Split best_split(std::span<const double> signal, std::size_t lo, std::size_t hi,
                 const CostFn& cost, std::size_t min_len) {
  if (cost.kind == CostKind::Ar && cost.order < 1) throw InvalidArgument("AR order must be >= 1");
  min_len = std::max(min_len, cost.min_length());
  if (hi > signal.size() || lo >= hi || hi - lo < 2 * min_len) {
    throw InvalidArgument("no_admissible_split",
                          "segment [" + std::to_string(lo) + ", " + std::to_string(hi) +
                              ") has no split with both sides at least " +
                              std::to_string(min_len) + " long");
  }
  std::vector<double> left, right;
  prefix_costs(signal, lo, hi, cost, left, right);
  const double total = left[hi - lo];
  Split best{lo + min_len, -1.0};
  for (std::size_t s = lo + min_len; s + min_len <= hi; ++s) {
    const double gain = std::max(0.0, total - left[s - lo] - right[s - lo]);
    if (gain > best.gain) best = {s, gain};
  }
  return best;
}

double split_threshold(double sigma, std::size_t n, double multiplier) {
  if (!(sigma > 0.0)) throw InvalidArgument("noise level sigma must be > 0");
  return multiplier * sigma * sigma * std::log(static_cast<double>(n));
}

std::vector<std::size_t> binseg_single(std::span<const double> signal, const DetectConfig& cfg) {
  if (cfg.s_g < 1) throw InvalidArgument("switch gap s_g must be >= 1");
  std::vector<std::size_t> out;
  for (const auto& c : binseg_detail(signal, cfg)) out.push_back(c.split.index);
  return out;
}

std::vector<std::size_t> apply_gap(const std::vector<std::size_t>& sorted, std::size_t s_g) {
  std::vector<std::size_t> kept;
  for (std::size_t idx : sorted) {
    if (kept.empty() || idx > kept.back() + s_g) kept.push_back(idx);
  }
  return kept;
}

SwitchSet make_switch_set(std::span<const double> t, std::vector<std::size_t> indices) {
  SwitchSet out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] == 0 || indices[i] + 1 >= t.size()) {
      throw InvalidArgument("switch index " + std::to_string(indices[i]) +
                            " must be strictly inside the time grid");
    }
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw InvalidArgument("switch indices must be strictly increasing");
    }
    out.times.push_back(t[indices[i]]);
  }
  out.indices = std::move(indices);
  return out;
}

SwitchSet detect_switches(const TimeSeries& data, const DetectConfig& cfg) {
  if (data.states() == 0 || data.samples() == 0) throw InvalidArgument("empty_data", "no data");
  data.validate();
  if (cfg.s_g < 1) throw InvalidArgument("switch gap s_g must be >= 1");
  const std::size_t n = data.samples();

  SwitchSet out;
  std::map<std::size_t, double> pool;  // index -> largest relative gain seen
  std::vector<double> row(n);
  for (std::size_t s = 0; s < data.states(); ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = data.X(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j));
    }
    const auto candidates = binseg_detail(row, cfg);
    std::vector<std::size_t> idx;
    for (const auto& c : candidates) idx.push_back(c.split.index);
    idx = apply_gap(idx, cfg.s_g);
    if (!idx.empty() && idx.back() == n - 1) idx.pop_back();
    for (std::size_t i : idx) {
      for (const auto& c : candidates) {
        if (c.split.index == i) pool[i] = std::max(pool[i], c.relative_gain);
      }
    }
    out.per_state[s] = std::move(idx);
  }

  std::vector<std::size_t> merged;
  for (const auto& [i, g] : pool) merged.push_back(i);
  merged = apply_gap(merged, cfg.s_g);

  if (const auto* fixed = std::get_if<FixedCount>(&cfg.mode)) {
    if (merged.size() != fixed->count) {
      if (cfg.strict_count || merged.size() < fixed->count) {
        throw Error("switch_count_mismatch",
                    "detected " + std::to_string(merged.size()) + " switches, expected " +
                        std::to_string(fixed->count));
      }
      std::stable_sort(merged.begin(), merged.end(),
                       [&](std::size_t a, std::size_t b) { return pool[a] > pool[b]; });
      merged.resize(fixed->count);
      std::sort(merged.begin(), merged.end());
    }
  }
  auto set = make_switch_set(data.t, std::move(merged));
  set.per_state = std::move(out.per_state);
  return set;
}

}  // namespace paramflux
