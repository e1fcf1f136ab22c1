#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wsnkf/analysis.hpp"
#include "wsnkf/channel.hpp"
#include "wsnkf/controller.hpp"
#include "wsnkf/scenario.hpp"
#include "wsnkf/trace.hpp"

namespace wsnkf {

/// Links are addressed by one flat index: sensor-GW links first, then
/// sensor-relay links relay-major, then relay-GW links.
struct LinkLayout {
  int M = 0;
  int L = 0;

  int count() const { return M + L * M + L; }
  int sensor_gw(int m) const { return m; }
  int sensor_relay(int l, int m) const { return M + l * M + m; }
  int relay_gw(int l) const { return M + L * M + l; }
  const LinkConfig& config(const Scenario& sc, int link) const;
  std::string name(int link) const;
};

/// Normalized complex gains g(t) of every link for t = 0..length-1.
std::vector<std::vector<Complex>> generate_link_traces(const Scenario& sc, int replication,
                                                       std::int64_t length);

/// FSMC per link, estimated from an independent training trace of the
/// configured length (one entry per link; empty model for links that do not
/// use FSMC beliefs unless `all` is set).
std::vector<FsmcModel> build_link_fsmc(const Scenario& sc, int replication, bool all = false);

/// What the gateway saw when it chose the decision for step k+1.
struct StepView {
  std::int64_t k = 0;
  const Scenario* scenario = nullptr;
  const DecisionSet* next = nullptr;
  const Matrix* P_next_prior = nullptr;
  const std::vector<Complex>* gains_now = nullptr;  // per flat link, g(k)
};

struct RunOptions {
  bool keep_trace = true;
  std::function<void(const StepView&)> on_decision;
};

struct RunResult {
  int replication = 0;
  std::vector<TraceRecord> trace;  // empty unless keep_trace
  std::vector<double> norm_prior;  // ‖P(k|k-1)‖ for k = 0..K-1
  RunMetrics metrics;
};

/// Closed loop over the scenario horizon; deterministic in (scenario, seed,
/// replication).
RunResult run_scenario(const Scenario& sc, int replication = 0, const RunOptions& options = {});

/// Decision used for step 0: initial powers, largest rate, SDC, relays off.
DecisionSet initial_decision(const Scenario& sc);

}  // namespace wsnkf
