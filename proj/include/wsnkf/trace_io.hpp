#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsnkf/analysis.hpp"
#include "wsnkf/trace.hpp"

namespace wsnkf {

/// CSV with a "# trace-schema: N" line and a header row. Column names for
/// link gains are taken from `link_names` (defaults g0, g1, ...). Reals are
/// written with 17 significant digits, so parsing returns identical values.
void write_trace(std::ostream& out, std::span<const TraceRecord> records,
                 const std::vector<std::string>& link_names = {});
void write_trace_file(const std::filesystem::path& path, std::span<const TraceRecord> records,
                      const std::vector<std::string>& link_names = {});

/// Throws ConfigError on a schema mismatch or malformed row.
std::vector<TraceRecord> parse_trace(std::istream& in);

nlohmann::json metrics_to_json(const RunMetrics& m);

}  // namespace wsnkf
