#include "paramflux/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "paramflux/error.hpp"

namespace paramflux {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw InvalidArgument("csv_parse", source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

TimeSeries read_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_fields(line);
    break;
  }
  if (header.size() < 2) fail(source, lineno, "header needs a time column and at least one state");

  const std::size_t m = header.size() - 1;
  std::vector<double> t;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      fail(source, lineno, "expected " + std::to_string(header.size()) + " fields, found " +
                               std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const char* begin = fields[c].c_str();
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(begin, &end);
      if (fields[c].empty() || end != begin + fields[c].size() || errno == ERANGE ||
          !std::isfinite(v)) {
        fail(source, lineno, "bad number '" + fields[c] + "' in column " + header[c]);
      }
      if (c == 0) {
        if (!t.empty() && !(v > t.back())) {
          throw InvalidArgument("non_monotone_time", source + ":" + std::to_string(lineno) +
                                                         ": time " + fields[c] +
                                                         " does not increase");
        }
        t.push_back(v);
      } else {
        values.push_back(v);
      }
    }
  }
  if (t.empty()) fail(source, lineno, "no data rows");

  TimeSeries ts;
  ts.t = std::move(t);
  ts.X.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(ts.t.size()));
  for (std::size_t j = 0; j < ts.t.size(); ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      ts.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[j * m + i];
    }
  }
  ts.names.assign(header.begin() + 1, header.end());
  return ts;
}

TimeSeries load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("io_error", "cannot open " + path.string());
  return read_csv(in, path.string());
}

void write_csv(std::ostream& out, const TimeSeries& data) {
  out << "t";
  for (std::size_t i = 0; i < data.states(); ++i) {
    out << ',' << (i < data.names.size() ? data.names[i] : "x" + std::to_string(i + 1));
  }
  out << '\n';
  char buf[32];
  for (std::size_t j = 0; j < data.samples(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", data.t[j]);
    out << buf;
    for (std::size_t i = 0; i < data.states(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g",
                    data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const TimeSeries& data) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("io_error", "cannot write " + path.string());
  write_csv(out, data);
  if (!out) throw InvalidArgument("io_error", "failed writing " + path.string());
}

}  // namespace paramflux
