#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>

#include "paramflux/timeseries.hpp"

namespace paramflux {

/// Reads `t,<state1>,...,<stateM>` CSV. Errors carry the kind "csv_parse"
/// (with the line number) or "non_monotone_time".
TimeSeries load_csv(const std::filesystem::path& path);
TimeSeries read_csv(std::istream& in, const std::string& source = "<stream>");

/// Writes with 17 significant digits. States without names become x1..xM.
void save_csv(const std::filesystem::path& path, const TimeSeries& data);
void write_csv(std::ostream& out, const TimeSeries& data);

}  // namespace paramflux
