#include "paramflux/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "paramflux/error.hpp"

namespace paramflux {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("io_error", "cannot write " + path.string());
  return out;
}

}  // namespace

void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::vector<PlotSeries>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double e = i < s.err.size() ? s.err[i] : 0.0;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i] - e);
      ymax = std::max(ymax, s.y[i] + e);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">" << escape(title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0, yv = ymin + (ymax - ymin) * k / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 16
        << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const char* color = kColors[s % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (ser.dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
      if (!std::isfinite(ser.y[i])) continue;
      out << px(ser.x[i]) << ',' << py(ser.y[i]) << ' ';
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < ser.err.size() && i < ser.x.size(); ++i) {
      out << "<line x1=\"" << px(ser.x[i]) << "\" x2=\"" << px(ser.x[i]) << "\" y1=\""
          << py(ser.y[i] - ser.err[i]) << "\" y2=\"" << py(ser.y[i] + ser.err[i])
          << "\" stroke=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 14 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << kLeft + pw + 12 << "\" x2=\"" << kLeft + pw + 36 << "\" y1=\"" << ly
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (ser.dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
    out << "<text x=\"" << kLeft + pw + 42 << "\" y=\"" << ly + 4 << "\">" << escape(ser.name)
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_trajectory_csv(const std::filesystem::path& path, const TimeSeries& data,
                          const TimeSeries& model) {
  if (data.X.rows() != model.X.rows() || data.X.cols() != model.X.cols()) {
    throw InvalidArgument("shape_mismatch", "data and model trajectories differ in shape");
  }
  auto out = open_out(path);
  auto name = [&](std::size_t i) {
    return i < data.names.size() ? data.names[i] : "x" + std::to_string(i + 1);
  };
  out << "t";
  for (std::size_t i = 0; i < data.states(); ++i) out << ',' << name(i) << "_data," << name(i) << "_model";
  out << '\n';
  char buf[32];
  for (std::size_t j = 0; j < data.samples(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", data.t[j]);
    out << buf;
    for (std::size_t i = 0; i < data.states(); ++i) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
      std::snprintf(buf, sizeof buf, "%.17g", data.X(r, c));
      out << ',' << buf;
      std::snprintf(buf, sizeof buf, "%.17g", model.X(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_param_csv(const std::filesystem::path& path, std::span<const double> tgrid,
                     const std::vector<std::string>& names, const ParamSchedule& est,
                     const std::optional<ParamSchedule>& truth) {
  auto out = open_out(path);
  out << "t";
  for (const auto& n : names) {
    out << ',' << n << "_est";
    if (truth) out << ',' << n << "_true";
  }
  out << '\n';
  char buf[32];
  for (double t : tgrid) {
    const auto pe = est.eval(t);
    const auto pt = truth ? truth->eval(t) : std::vector<double>{};
    std::snprintf(buf, sizeof buf, "%.17g", t);
    out << buf;
    for (std::size_t j = 0; j < names.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", pe[j]);
      out << ',' << buf;
      if (truth) {
        std::snprintf(buf, sizeof buf, "%.17g", pt[j]);
        out << ',' << buf;
      }
    }
    out << '\n';
  }
}

std::vector<std::size_t> plotted_states(std::size_t states, std::size_t max_states) {
  std::vector<std::size_t> out;
  if (states == 0 || max_states == 0) return out;
  if (states <= max_states) {
    for (std::size_t i = 0; i < states; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t k = 0; k < max_states; ++k) {
    out.push_back((k + 1) * states / (max_states + 1));
  }
  return out;
}

}  // namespace paramflux
