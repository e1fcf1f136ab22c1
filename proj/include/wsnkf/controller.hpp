#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "wsnkf/channel.hpp"
#include "wsnkf/codec.hpp"
#include "wsnkf/link.hpp"
#include "wsnkf/plant.hpp"

namespace wsnkf {

enum class SearchMode { TwoStage, Exhaustive };
enum class RelayMode { OnOff, AlwaysOn, Off };

struct ControllerConfig {
  double energy_weight = 1e9;               // ϱ
  std::vector<double> increments{-3e-5, 3e-5};
  SearchMode search = SearchMode::TwoStage;
  std::vector<SchemeKind> menu{SchemeKind::Sdc};
  std::vector<int> mdc_descriptions{2, 3};
  // Redundancy candidates a; values above b/J are dropped. With
  // mdc_full_redundancy the repetition point a = b/J is added.
  std::vector<double> mdc_redundancy{1.0, 2.0};
  bool mdc_full_redundancy = true;
  RelayMode relay_mode = RelayMode::OnOff;
  std::size_t outcome_cap = std::size_t{1} << 16;
  double u_min = 0.0;  // power floor for the increment clamp

  // Simple-logic baseline.
  double threshold = 2e-15;  // T_u on ĝ·u
  std::vector<std::pair<double, double>> bit_table{
      {-110.0, 8.0}, {-120.0, 6.0}, {-130.0, 4.0}};  // (lower dB edge, bits)
  double bit_floor = 3.0;                           // below the last edge

  bool allows(SchemeKind k) const;
  void validate() const;
};

/// Gain beliefs for the step being decided, one per link.
struct LinkBeliefs {
  std::vector<GainBelief> sensor_gw;                  // [m]
  std::vector<std::vector<GainBelief>> sensor_relay;  // [l][m]
  std::vector<GainBelief> relay_gw;                   // [l]
};

/// What the gateway knows when it picks S(k+1).
struct ControllerContext {
  const PlantModel* design = nullptr;  // model the filter and controller assume
  std::vector<double> source_var;      // σ²_{y_m}
  Matrix meas_cov;                     // joint covariance of y, for ZEC
  std::vector<std::vector<double>> rate_sets;
  std::vector<RelaySpec> relays;
  BerModel ber;
  EnergyParams energy;
  std::vector<double> u_prev;
  LinkBeliefs beliefs;
};

struct CostBreakdown {
  double expected_trace = 0.0;
  double energy = 0.0;
  double total = 0.0;
};

/// clamp(u_prev + du, u_min, u_max).
double apply_increment(double u_prev, double du, double u_max, double u_min = 0.0);

/// Candidate MDC schemes for nominal rate b under the configured grid.
std::vector<SchemeSpec> mdc_candidates(double b, const ControllerConfig& cfg);

/// E{tr P(k+1|k+1)} under decision S, by enumeration of per-sensor
/// received-count and per-relay delivery outcomes. Throws
/// SearchSpaceTooLarge above `cap` outcomes.
double expected_posterior_trace(const Matrix& P_next_prior, const DecisionSet& S,
                                const ControllerContext& ctx,
                                std::size_t cap = std::size_t{1} << 16);

/// Energy term of the cost. Relays that are on are charged for the longest
/// payload in their set.
double expected_energy(const DecisionSet& S, const ControllerContext& ctx);

CostBreakdown evaluate_cost(const Matrix& P_next_prior, const DecisionSet& S,
                            const ControllerContext& ctx, const ControllerConfig& cfg);

struct OptimizeResult {
  DecisionSet decision;
  CostBreakdown cost;
  std::size_t candidates = 0;
};

/// One-step predictive argmin. Ties go to lower energy, then lower total
/// rate, then enumeration order.
OptimizeResult optimize(const Matrix& P_next_prior, const ControllerContext& ctx,
                        const ControllerConfig& cfg);

/// Threshold baseline. Power moves by the largest configured increment
/// towards ĝ·u ≈ T_u and stays put when the move would leave [u_min, u_max];
/// bits follow the dB table. SDC only, relays off.
DecisionSet simple_logic(const std::vector<double>& g_pred, const std::vector<double>& u_prev,
                         const ControllerConfig& cfg, const EnergyParams& energy,
                         const std::vector<std::vector<double>>& rate_sets, std::size_t relays);

}  // namespace wsnkf
