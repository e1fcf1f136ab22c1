#pragma once

#include <vector>

#include "wsnkf/channel.hpp"
#include "wsnkf/codec.hpp"
#include "wsnkf/random.hpp"

namespace wsnkf {

struct SensorDecision {
  double du = 0.0;  // power increment that produced u
  double u = 0.0;   // transmit power, W
  SchemeSpec scheme;

  bool operator==(const SensorDecision&) const = default;
};

/// Everything the gateway commands for one step: per-sensor power and
/// codebook, per-relay on/off power.
struct DecisionSet {
  std::vector<SensorDecision> sensors;
  std::vector<double> mu;  // per relay, 0 or mu_max

  double total_rate() const;
  bool operator==(const DecisionSet&) const = default;
};

/// A relay overhears the sensors in `sensors` and forwards the XOR of their
/// payloads when it has received all of them.
struct RelaySpec {
  double mu_max = 1e-4;
  std::vector<int> sensors;
};

struct EnergyParams {
  double r = 1e8;            // channel bit-rate, bit/s
  double processing = 0.0;   // E_P, J per active transmission
  std::vector<double> u_max; // per sensor, W
  std::vector<double> mu_max;// per relay, W

  void validate() const;
};

/// Physical power gains |g|² of every link for one step.
struct ChannelGains {
  std::vector<double> sensor_gw;                  // [m]
  std::vector<std::vector<double>> sensor_relay;  // [l][m]
  std::vector<double> relay_gw;                   // [l]
};

struct TransmissionOutcome {
  std::vector<std::vector<int>> gamma;  // [m][description]
  std::vector<std::vector<int>> zeta;   // [l][m], whole payload overheard
  std::vector<int> gamma_tilde;         // [l]
};

struct ReconstructionFlags {
  std::vector<int> theta;           // [m]
  std::vector<int> received_count;  // [m], descriptions usable at the GW
};

/// Bits sensor m puts on the air for its whole payload.
inline double payload_bits(const SensorDecision& d) { return d.scheme.coded_rate; }

/// Bernoulli draws of every arrival bit. Relay ℓ only transmits when it is on
/// and overheard every payload of its XOR set; otherwise γ̃_ℓ = 0.
TransmissionOutcome draw_outcomes(const DecisionSet& decisions, const std::vector<RelaySpec>& relays,
                                  const ChannelGains& gains, const BerModel& ber, RandomStream& rng);

/// Applies the coding-scheme and XOR-relay logic to outcome bits.
///
/// A relay transmission counts only if it was admissible (relay on and every
/// member of its set overheard). Sensor m is recovered through relay ℓ when
/// m is in the set and every other member arrived directly. A recovered MDC
/// payload yields all J descriptions.
ReconstructionFlags reconstruct_flags(const TransmissionOutcome& outcome, const DecisionSet& decisions,
                                      const std::vector<RelaySpec>& relays);

/// Length of the XOR payload: the longest received payload after zero
/// padding.
double relay_payload_bits(const std::vector<double>& received_lengths);

/// Payload of relay ℓ given the sensors it overheard (0 if it cannot send).
double relay_payload_for(const TransmissionOutcome& outcome, const DecisionSet& decisions,
                         const RelaySpec& relay, int l);

/// Step energy: Σ_m (b_m u_m / r + E_P)[u_m > 0] plus (b̃_ℓ μ_ℓ / r + E_P)
/// for every relay with μ_ℓ > 0 and b̃_ℓ > 0.
double step_energy(const DecisionSet& decisions, const std::vector<double>& relay_payloads,
                   const EnergyParams& params);

/// Throws ContractViolation if a decision breaks a power cap, uses a rate
/// outside the sensor's rate set or a relay power other than 0 / mu_max.
void check_decision(const DecisionSet& decisions, const EnergyParams& params,
                    const std::vector<std::vector<double>>& rate_sets);

}  // namespace wsnkf
