#include "wsnkf/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

#include "wsnkf/error.hpp"

namespace wsnkf {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const char* kSensorFields[] = {"u", "b", "coded", "scheme", "J", "a", "dom", "rx", "theta", "count"};
const char* kRelayFields[] = {"mu", "overheard", "tx", "gt"};
const char* kTail[] = {"trace_prior", "trace_post", "norm_prior", "sq_error", "energy",
                       "cost_trace", "cost_energy", "cost_total"};

}  // namespace

void write_trace(std::ostream& out, std::span<const TraceRecord> records,
                 const std::vector<std::string>& link_names) {
  const std::size_t G = records.empty() ? link_names.size() : records.front().gain_dB.size();
  const std::size_t M = records.empty() ? 0 : records.front().sensors.size();
  const std::size_t L = records.empty() ? 0 : records.front().relays.size();
  out << "# trace-schema: " << kTraceSchemaVersion << "\n";
  out << "k";
  for (std::size_t i = 0; i < G; ++i)
    out << ",g_" << (i < link_names.size() ? link_names[i] : "link" + std::to_string(i)) << "_dB";
  for (std::size_t m = 0; m < M; ++m)
    for (const char* f : kSensorFields) out << ",s" << m << "_" << f;
  for (std::size_t l = 0; l < L; ++l)
    for (const char* f : kRelayFields) out << ",r" << l << "_" << f;
  for (const char* f : kTail) out << "," << f;
  out << "\n";

  for (const auto& r : records) {
    if (r.gain_dB.size() != G || r.sensors.size() != M || r.relays.size() != L)
      throw ContractViolation("write_trace: records have inconsistent shapes");
    out << r.k;
    for (double g : r.gain_dB) out << "," << fmt(g);
    for (const auto& s : r.sensors)
      out << "," << fmt(s.u) << "," << fmt(s.rate) << "," << fmt(s.coded_rate) << "," << s.scheme << ","
          << s.descriptions << "," << fmt(s.redundancy) << "," << s.dominant << "," << s.received << ","
          << s.theta << "," << s.received_count;
    for (const auto& rl : r.relays)
      out << "," << fmt(rl.mu) << "," << rl.overheard << "," << rl.transmitted << "," << rl.gamma_tilde;
    for (double v : {r.trace_prior, r.trace_post, r.norm_prior, r.sq_error, r.energy, r.cost_trace,
                     r.cost_energy, r.cost_total})
      out << "," << fmt(v);
    out << "\n";
  }
}

void write_trace_file(const std::filesystem::path& path, std::span<const TraceRecord> records,
                      const std::vector<std::string>& link_names) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace file " + path.string());
  write_trace(out, records, link_names);
}

std::vector<TraceRecord> parse_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace: empty input");
  const std::regex schema_re(R"(# trace-schema: (\d+))");
  std::smatch match;
  if (!std::regex_match(line, match, schema_re)) throw ConfigError("trace: missing schema line");
  if (std::stoi(match[1]) != kTraceSchemaVersion)
    throw ConfigError("trace: unsupported schema version " + match[1].str());
  if (!std::getline(in, line)) throw ConfigError("trace: missing header");
  const auto header = split(line);

  std::size_t G = 0, M = 0, L = 0;
  const std::regex sensor_re(R"(s(\d+)_u)"), relay_re(R"(r(\d+)_mu)");
  for (const auto& h : header) {
    if (h.size() > 5 && h.rfind("g_", 0) == 0 && h.substr(h.size() - 3) == "_dB") ++G;
    if (std::regex_match(h, sensor_re)) ++M;
    if (std::regex_match(h, relay_re)) ++L;
  }
  const std::size_t columns = 1 + G + 10 * M + 4 * L + 8;
  if (header.size() != columns) throw ConfigError("trace: header has an unexpected column count");

  std::vector<TraceRecord> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != columns) throw ConfigError("trace: row " + std::to_string(row) + " has the wrong width");
    try {
      std::size_t c = 0;
      auto real = [&] { return std::stod(cells[c++]); };
      auto integer = [&] { return std::stoi(cells[c++]); };
      TraceRecord r;
      r.k = std::stoll(cells[c++]);
      for (std::size_t i = 0; i < G; ++i) r.gain_dB.push_back(real());
      for (std::size_t m = 0; m < M; ++m) {
        SensorRecord s;
        s.u = real();
        s.rate = real();
        s.coded_rate = real();
        s.scheme = cells[c++];
        s.descriptions = integer();
        s.redundancy = real();
        s.dominant = integer();
        s.received = integer();
        s.theta = integer();
        s.received_count = integer();
        r.sensors.push_back(s);
      }
      for (std::size_t l = 0; l < L; ++l) {
        RelayRecord rl;
        rl.mu = real();
        rl.overheard = integer();
        rl.transmitted = integer();
        rl.gamma_tilde = integer();
        r.relays.push_back(rl);
      }
      r.trace_prior = real();
      r.trace_post = real();
      r.norm_prior = real();
      r.sq_error = real();
      r.energy = real();
      r.cost_trace = real();
      r.cost_energy = real();
      r.cost_total = real();
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ConfigError("trace: row " + std::to_string(row) + " has a malformed value");
    }
  }
  return out;
}

nlohmann::json metrics_to_json(const RunMetrics& m) {
  nlohmann::json j{{"steps", m.steps},         {"V_bar", m.V_bar},
                   {"phi", m.phi},             {"D_emp", m.D_emp},
                   {"E_total", m.E_total},     {"relay_slots", m.relay_slots},
                   {"relay_delivered", m.relay_delivered}};
  j["relay_efficiency"] = m.relay_efficiency ? nlohmann::json(*m.relay_efficiency) : nlohmann::json(nullptr);
  return j;
}

}  // namespace wsnkf
