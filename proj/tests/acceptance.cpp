// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include "paramflux/detect.hpp"
#include "paramflux/error.hpp"
#include "paramflux/metrics.hpp"
#include "paramflux/pipeline.hpp"

using namespace paramflux;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  bool ok = true;
  std::string text;

  void require(bool cond, const std::string& what) {
    ok = ok && cond;
    if (!text.empty()) text += ", ";
    text += what + (cond ? "" : " [x]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PipelineConfig config(const std::string& name) {
  return load_pipeline_config(fs::path(PARAMFLUX_CONFIG_DIR) / (name + ".json"));
}

// Piecewise reproduction with exact switch recovery and error ceilings.
Outcome piecewise_case(const std::string& name, double e_p_max, double e_t_max, double seconds_max) {
  const auto cfg = config(name);
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = load_data(cfg);
  const auto r = run_pipeline(cfg, data);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& m = *r.metrics;

  Check c;
  std::string times;
  for (double t : r.switches.times) times += (times.empty() ? "" : " ") + fmt("%.4g", t);
  c.require(!m.h_s.infinite && m.h_s.value == 0.0, "H_s=" + (m.h_s.infinite ? std::string("inf") : fmt("%g", m.h_s.value)));
  c.require(m.e_ns == 0, "E_Ns=" + std::to_string(m.e_ns) + " {" + times + "}");
  c.require(m.e_p_segment && *m.e_p_segment <= e_p_max,
            "E_p=" + (m.e_p_segment ? fmt("%.4g", *m.e_p_segment) : std::string("n/a")) + "<=" + fmt("%g", e_p_max));
  c.require(m.e_t <= e_t_max, "E_t=" + fmt("%.3g", m.e_t) + "<=" + fmt("%g", e_t_max));
  const Json doc = Json::parse(result_to_json(cfg, r, "data.csv").dump());
  c.require(std::abs(traj_error(data, replay_model(doc, data)) - m.e_t) <= 1e-12, "replay");
  c.require(secs <= seconds_max, fmt("%.1fs", secs));
  return {c.ok, c.text};
}

Outcome advdiff_case() {
  const auto cfg = config("advdiff");
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = load_data(cfg);
  const auto r = run_pipeline(cfg, data);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Check c;
  const SparseFit* curve = nullptr;
  for (const auto& cv : r.curves) {
    if (cv) curve = &*cv;
  }
  if (curve == nullptr) return {false, "no sparse curve"};
  const std::size_t dom = curve->dominant_atom(data.t);
  const Atom& atom = curve->atoms[dom];
  const bool is_sine = atom.family == AtomFamily::Sinusoid;
  c.require(is_sine, "dominant=" + atom.label());
  if (is_sine) {
    const double w = curve->weights[dom];
    c.require(w >= 0.85 && w <= 1.10, "w=" + fmt("%.4g", w));
    c.require(std::abs(atom.theta[0] - 3.0) <= 0.2, "omega=" + fmt("%.4g", atom.theta[0]));
    c.require(std::abs(wrap_phase(atom.theta[1] + 1.0)) <= 0.3, "phi=" + fmt("%.4g", atom.theta[1]));
  }
  const double d_hat = r.static_values.empty() ? NAN : r.static_values[0];
  c.require(std::abs(d_hat - 0.01) <= 0.005, "D=" + fmt("%.5g", d_hat));
  const double with = r.metrics->e_p_grid;
  const double without = r.interval_e_p_grid.value_or(NAN);
  c.require(with < without, "E_p " + fmt("%.4g", with) + " < " + fmt("%.4g", without) + " (grid)");
  c.require(secs <= 900, fmt("%.1fs", secs));
  return {c.ok, c.text};
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

Outcome noise_case() {
  const auto cfg = config("gene_noise");
  const std::vector<double> sigmas{0.0, 0.75, 1.25, 2.25};
  std::vector<std::uint64_t> seeds(10);
  std::iota(seeds.begin(), seeds.end(), 0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto study = noise_study(cfg, sigmas, seeds, std::max(1u, std::thread::hardware_concurrency()));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<double> hs, ep, et;
  for (const auto& row : study.rows) {
    hs.push_back(row.h_s_mean);
    ep.push_back(row.e_p_mean);
    et.push_back(row.e_t_mean);
  }
  Check c;
  const auto report = [&](const char* name, const std::vector<double>& v) {
    std::string vals;
    for (double x : v) vals += (vals.empty() ? "" : " ") + fmt("%.3g", x);
    const bool monotone = std::is_sorted(v.begin(), v.end());
    const double rho = spearman(sigmas, v);
    c.require(rho > 0.0, std::string(name) + " rho=" + fmt("%.2f", rho) + " [" + vals + "]" +
                             (monotone ? "" : " not strictly monotone"));
  };
  report("H_s", hs);
  report("E_p", ep);
  report("E_t", et);
  c.require(secs <= 1200, fmt("%.1fs", secs));
  return {c.ok, c.text};
}

double l2(const std::vector<double>& p1, const std::vector<double>& p2, std::size_t lo, std::size_t hi) {
  const double n = static_cast<double>(hi - lo);
  const double s = p1[hi] - p1[lo];
  return (p2[hi] - p2[lo]) - s * s / n;
}

Outcome oracle_case() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n01;
  const auto draw = [&](std::size_t jumps, std::size_t& n) {
    n = 20 + static_cast<std::size_t>(u(rng) * 181);  // 20..200
    const double sigma = 0.2 * u(rng);
    std::vector<std::size_t> at;
    while (at.size() < jumps) {
      const std::size_t k = 4 + static_cast<std::size_t>(u(rng) * static_cast<double>(n - 8));
      if (std::none_of(at.begin(), at.end(), [&](std::size_t a) { return a + 4 > k && k + 4 > a; })) at.push_back(k);
    }
    std::vector<double> x(n);
    double level = 0.0;
    std::sort(at.begin(), at.end());
    for (std::size_t i = 0, j = 0; i < n; ++i) {
      while (j < at.size() && at[j] == i) level += (u(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + u(rng)), ++j;
      x[i] = level + sigma * n01(rng);
    }
    return x;
  };
  const auto prefix = [](const std::vector<double>& x, std::vector<double>& p1, std::vector<double>& p2) {
    p1.assign(x.size() + 1, 0.0);
    p2.assign(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) p1[i + 1] = p1[i] + x[i], p2[i + 1] = p2[i] + x[i] * x[i];
  };
  DetectConfig cfg;
  cfg.cost = CostFn::l2();
  cfg.s_g = 1;

  int single_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 0;
    const auto x = draw(1, n);
    std::vector<double> p1, p2;
    prefix(x, p1, p2);
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t s = 2; s + 2 <= n; ++s) {
      const double g = l2(p1, p2, 0, n) - l2(p1, p2, 0, s) - l2(p1, p2, s, n);
      if (g > best + 1e-12 * std::max(1.0, best)) best = g, arg = s;
    }
    cfg.mode = FixedCount{1};
    const auto idx = binseg_single(x, cfg);
    if (idx.size() == 1 && idx[0] == arg) ++single_ok;
  }

  int double_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 0;
    const auto x = draw(2, n);
    std::vector<double> p1, p2;
    prefix(x, p1, p2);
    const double total = l2(p1, p2, 0, n);
    double best = 0.0;
    for (std::size_t a = 2; a + 4 <= n; ++a) {
      for (std::size_t b = a + 2; b + 2 <= n; ++b) {
        best = std::max(best, total - l2(p1, p2, 0, a) - l2(p1, p2, a, b) - l2(p1, p2, b, n));
      }
    }
    cfg.mode = FixedCount{2};
    const auto idx = binseg_single(x, cfg);
    if (idx.size() != 2) continue;
    const double greedy = total - l2(p1, p2, 0, idx[0]) - l2(p1, p2, idx[0], idx[1]) - l2(p1, p2, idx[1], n);
    if (greedy >= 0.95 * best) ++double_ok;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Check c;
  c.require(single_ok == 100, "1 jump " + std::to_string(single_ok) + "/100");
  c.require(double_ok >= 95, "2 jumps " + std::to_string(double_ok) + "/100");
  c.require(secs <= 60, fmt("%.1fs", secs));
  return {c.ok, c.text};
}

Outcome property_case() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = std::string(PARAMFLUX_TESTS) + " \"[property]\" > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Check c;
  c.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, "property suite exit " +
                                                               std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  c.require(secs <= 120, fmt("%.1fs", secs));
  return {c.ok, c.text};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pvts", [] { return piecewise_case("pvts", 0.15, 0.01, 600); }},
      {"heat", [] { return piecewise_case("heat", 0.30, 0.005, 600); }},
      {"nonuniform", [] { return piecewise_case("gene_nonuniform", 0.10, 0.005, 300); }},
      {"advdiff_sparse", advdiff_case},
      {"noise_cascade", noise_case},
      {"binseg_oracle", oracle_case},
      {"property_suites", property_case},
  };
  // optional argument: run only the criteria whose numbers are listed, e.g. "1,6"
  std::vector<bool> selected(criteria.size(), argc < 2);
  if (argc >= 2) {
    std::string list = argv[1];
    for (char& ch : list) ch = ch == ',' ? ' ' : ch;
    for (std::size_t pos = 0; pos < list.size();) {
      std::size_t used = 0;
      const int k = std::stoi(list.substr(pos), &used);
      if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[static_cast<std::size_t>(k - 1)] = true;
      pos += used;
      while (pos < list.size() && list[pos] == ' ') ++pos;
    }
  }

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
