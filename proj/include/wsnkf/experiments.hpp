#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wsnkf/analysis.hpp"
#include "wsnkf/scenario.hpp"
#include "wsnkf/simulation.hpp"

namespace wsnkf {

/// Field-wise mean of RunMetrics over the scenario's replications
/// (E_total is the mean total energy per run).
struct ReplicatedMetrics {
  RunMetrics mean;
  std::vector<RunMetrics> runs;
};

/// Field-wise mean; steps and relay counts are summed.
RunMetrics mean_metrics(std::span<const RunMetrics> runs);

ReplicatedMetrics run_replicated(const Scenario& sc);

struct ComparisonRow {
  std::string label;
  RunMetrics metrics;
  // Relative change against the first row, (x - x_ref)/x_ref.
  double energy_change = 0.0;
  double phi_change = 0.0;
  double D_change = 0.0;
  double V_change = 0.0;
};

/// Runs every variant on its own seed and replications; variants meant for
/// comparison share the seed, so channel and noise realizations coincide.
std::vector<ComparisonRow> compare_controllers(const std::vector<std::pair<std::string, Scenario>>& variants);

enum class SweepParam { EnergyWeight, UMax, Increment, MuMax };

SweepParam sweep_param_from_string(const std::string& s);
const char* to_string(SweepParam p);

/// Copy of `sc` with the parameter set to `value` (the increment sweep sets
/// {-value, +value}).
Scenario with_param(const Scenario& sc, SweepParam p, double value);

std::vector<std::pair<double, RunMetrics>> sweep(const Scenario& sc, SweepParam p, const std::vector<double>& grid);

struct EnergyMatch {
  double energy_weight = 0.0;
  RunMetrics metrics;
  int runs = 0;
  bool matched = false;
};

/// Bisection on log ϱ in [lo, hi] for a closed-loop total energy within
/// rel_tol of `target`. Returns the closest run when no point matches.
EnergyMatch match_energy(const Scenario& sc, double target, double lo, double hi, double rel_tol = 0.01,
                         int max_runs = 40);

struct BoundReport {
  BoundParams params;
  double nu_certified = 1.0;
  bool certified = false;
  int replications = 0;
  std::vector<double> bound;      // k = 0..k_max
  std::vector<double> mean_norm;  // Monte-Carlo mean of ‖P(k|k-1)‖
  bool all_pass = false;
};

/// Monte-Carlo check of the covariance bound. The scenario is certified when
/// it is SDC-only with a positive power floor and ν_cert·‖A‖² < 1.
BoundReport verify_bound(const Scenario& sc, int replications, int k_max = 200);

struct NuEstimate {
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> per_state;
  std::size_t samples = 0;
};

/// Closed-loop estimate of ν: at every `stride`-th visited step, `draws`
/// next-step outcomes are sampled (next gains from the AR recursion) under
/// the chosen decision and the rank-deficient fraction is recorded.
NuEstimate estimate_nu(const Scenario& sc, std::size_t draws, std::size_t stride = 1, int replication = 0);

struct MdcCurve {
  std::vector<std::string> labels;  // "SDC", "MDC2", "MDC3", ...
  std::vector<double> gain_dB;
  std::vector<std::vector<double>> distortion;  // [curve][gain]
};

/// Expected distortion (σ² = 1) against power gain at fixed total rate and
/// power. Each MDC curve takes the best redundancy in the configured grid.
MdcCurve mdc_curve(double b, double u, const BerModel& ber, const std::vector<double>& gain_dB,
                   const ControllerConfig& cfg = {});

/// Gains where the pointwise-best curve changes, with the (from, to) labels.
std::vector<std::pair<double, std::pair<std::string, std::string>>> curve_crossovers(const MdcCurve& c);

nlohmann::json bound_report_to_json(const BoundReport& r);
nlohmann::json fsmc_to_json(const FsmcModel& f);

}  // namespace wsnkf
