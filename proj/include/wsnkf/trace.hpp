#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wsnkf {

inline constexpr int kTraceSchemaVersion = 1;

struct SensorRecord {
  double u = 0.0;
  double rate = 0.0;        // nominal b
  double coded_rate = 0.0;  // bits sent
  std::string scheme = "SDC";
  int descriptions = 1;
  double redundancy = 0.0;
  int dominant = -1;
  int received = 0;         // descriptions received directly
  int theta = 0;
  int received_count = 0;   // descriptions usable after relay recovery

  bool operator==(const SensorRecord&) const = default;
};

struct RelayRecord {
  double mu = 0.0;
  int overheard = 0;     // sensors of the XOR set overheard
  int transmitted = 0;   // relay sent the XOR packet
  int gamma_tilde = 0;   // XOR packet reached the GW

  bool operator==(const RelayRecord&) const = default;
};

/// One closed-loop step.
struct TraceRecord {
  std::int64_t k = 0;
  std::vector<double> gain_dB;  // sensor-GW, sensor-relay (relay-major), relay-GW
  std::vector<SensorRecord> sensors;
  std::vector<RelayRecord> relays;
  double trace_prior = 0.0;  // tr P(k|k-1)
  double trace_post = 0.0;   // tr P(k|k)
  double norm_prior = 0.0;   // ‖P(k|k-1)‖
  double sq_error = 0.0;     // ‖x(k) - x̂(k)‖²
  double energy = 0.0;       // J spent in step k
  // Cost of the decision chosen at step k for step k+1.
  double cost_trace = 0.0;
  double cost_energy = 0.0;
  double cost_total = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

}  // namespace wsnkf
