#include "wsnkf/link.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wsnkf/error.hpp"

namespace wsnkf {

double DecisionSet::total_rate() const {
  double b = 0.0;
  for (const auto& s : sensors) b += s.scheme.coded_rate;
  return b;
}

void EnergyParams::validate() const {
  if (!(r > 0.0)) throw ConfigError("energy.r must be > 0");
  if (!(processing >= 0.0)) throw ConfigError("energy.E_P must be >= 0");
  for (double u : u_max)
    if (!(u > 0.0)) throw ConfigError("energy.u_max entries must be > 0");
  for (double mu : mu_max)
    if (!(mu > 0.0)) throw ConfigError("relay mu_max must be > 0");
}

TransmissionOutcome draw_outcomes(const DecisionSet& decisions, const std::vector<RelaySpec>& relays,
                                  const ChannelGains& gains, const BerModel& ber, RandomStream& rng) {
  const std::size_t M = decisions.sensors.size();
  const std::size_t L = relays.size();
  TransmissionOutcome out;
  out.gamma.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& d = decisions.sensors[m];
    const int J = d.scheme.packets();
    out.gamma[m].assign(J, 0);
    const double p = packet_success(d.u, gains.sensor_gw[m], d.scheme.packet_bits(), ber);
    for (int i = 0; i < J; ++i) out.gamma[m][i] = rng.bernoulli(p) ? 1 : 0;
  }
  out.zeta.assign(L, std::vector<int>(M, 0));
  out.gamma_tilde.assign(L, 0);
  for (std::size_t l = 0; l < L; ++l) {
    for (int m : relays[l].sensors) {
      const auto& d = decisions.sensors[m];
      const double p = packet_success(d.u, gains.sensor_relay[l][m], payload_bits(d), ber);
      out.zeta[l][m] = rng.bernoulli(p) ? 1 : 0;
    }
    const double mu = l < decisions.mu.size() ? decisions.mu[l] : 0.0;
    const double bits = relay_payload_for(out, decisions, relays[l], static_cast<int>(l));
    if (mu > 0.0 && bits > 0.0) {
      const double p = packet_success(mu, gains.relay_gw[l], bits, ber);
      out.gamma_tilde[l] = rng.bernoulli(p) ? 1 : 0;
    }
  }
  return out;
}

double relay_payload_bits(const std::vector<double>& received_lengths) {
  if (received_lengths.empty()) throw ContractViolation("relay_payload_bits: empty payload list");
  return *std::max_element(received_lengths.begin(), received_lengths.end());
}

double relay_payload_for(const TransmissionOutcome& outcome, const DecisionSet& decisions,
                         const RelaySpec& relay, int l) {
  if (relay.sensors.empty()) return 0.0;
  std::vector<double> lengths;
  for (int m : relay.sensors) {
    if (!outcome.zeta[l][m]) return 0.0;
    lengths.push_back(payload_bits(decisions.sensors[m]));
  }
  return relay_payload_bits(lengths);
}

ReconstructionFlags reconstruct_flags(const TransmissionOutcome& outcome, const DecisionSet& decisions,
                                      const std::vector<RelaySpec>& relays) {
  const std::size_t M = decisions.sensors.size();
  if (outcome.gamma.size() != M) throw ContractViolation("reconstruct_flags: gamma/sensor count mismatch");
  if (outcome.zeta.size() != relays.size() || outcome.gamma_tilde.size() != relays.size())
    throw ContractViolation("reconstruct_flags: relay outcome shape mismatch");

  // direct[m]: whole payload at the GW; count[m]: descriptions received.
  std::vector<int> direct(M, 0), count(M, 0);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& s = decisions.sensors[m].scheme;
    if (static_cast<int>(outcome.gamma[m].size()) != s.packets())
      throw ContractViolation("reconstruct_flags: sensor " + std::to_string(m) +
                              " has the wrong number of description bits");
    for (int g : outcome.gamma[m]) count[m] += g;
    direct[m] = count[m] == s.packets() ? 1 : 0;
  }

  std::vector<int> available = direct;
  for (std::size_t l = 0; l < relays.size(); ++l) {
    if (outcome.zeta[l].size() != M) throw ContractViolation("reconstruct_flags: zeta shape mismatch");
    if (!outcome.gamma_tilde[l]) continue;
    const auto& set = relays[l].sensors;
    const bool admissible = !set.empty() && std::all_of(set.begin(), set.end(), [&](int m) {
      return outcome.zeta[l][m] == 1;
    });
    if (!admissible) continue;
    for (int m : set) {
      if (direct[m]) continue;
      const bool others = std::all_of(set.begin(), set.end(), [&](int o) { return o == m || direct[o]; });
      if (others) available[m] = 1;
    }
  }

  ReconstructionFlags flags;
  flags.theta.assign(M, 0);
  flags.received_count.assign(M, 0);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& d = decisions.sensors[m];
    const auto& s = d.scheme;
    const bool recovered = available[m] && !direct[m];
    switch (s.kind) {
      case SchemeKind::Sdc:
        flags.theta[m] = available[m];
        flags.received_count[m] = available[m];
        break;
      case SchemeKind::Mdc:
        flags.received_count[m] = recovered ? s.descriptions : count[m];
        flags.theta[m] = flags.received_count[m] >= 1 ? 1 : 0;
        break;
      case SchemeKind::Zec: {
        const int dom = s.dominant;
        if (dom < 0 || dom >= static_cast<int>(M))
          throw ContractViolation("reconstruct_flags: ZEC dominant index out of range");
        if (dom == static_cast<int>(m)) {
          flags.theta[m] = available[m];
        } else {
          const bool powered = d.u * decisions.sensors[dom].u > 0.0;
          flags.theta[m] = powered && available[m] && available[dom] ? 1 : 0;
        }
        flags.received_count[m] = flags.theta[m];
        break;
      }
    }
  }
  return flags;
}

double step_energy(const DecisionSet& decisions, const std::vector<double>& relay_payloads,
                   const EnergyParams& params) {
  double e = 0.0;
  for (std::size_t m = 0; m < decisions.sensors.size(); ++m) {
    const auto& d = decisions.sensors[m];
    if (m < params.u_max.size() && d.u > params.u_max[m] * (1.0 + 1e-12))
      throw ContractViolation("step_energy: sensor " + std::to_string(m) + " exceeds its power cap");
    if (d.u < 0.0) throw ContractViolation("step_energy: negative sensor power");
    if (d.u > 0.0) e += payload_bits(d) * d.u / params.r + params.processing;
  }
  for (std::size_t l = 0; l < decisions.mu.size(); ++l) {
    const double mu = decisions.mu[l];
    if (mu < 0.0 || (l < params.mu_max.size() && mu > params.mu_max[l] * (1.0 + 1e-12)))
      throw ContractViolation("step_energy: relay " + std::to_string(l) + " power out of range");
    const double bits = l < relay_payloads.size() ? relay_payloads[l] : 0.0;
    if (mu > 0.0 && bits > 0.0) e += bits * mu / params.r + params.processing;
  }
  return e;
}

void check_decision(const DecisionSet& decisions, const EnergyParams& params,
                    const std::vector<std::vector<double>>& rate_sets) {
  for (std::size_t m = 0; m < decisions.sensors.size(); ++m) {
    const auto& d = decisions.sensors[m];
    if (d.u < 0.0 || d.u > params.u_max.at(m) * (1.0 + 1e-12))
      throw ContractViolation("decision: sensor " + std::to_string(m) + " power outside [0, u_max]");
    const auto& rates = rate_sets.at(m);
    if (std::find(rates.begin(), rates.end(), d.scheme.rate) == rates.end())
      throw ContractViolation("decision: sensor " + std::to_string(m) + " rate not in its rate set");
  }
  for (std::size_t l = 0; l < decisions.mu.size(); ++l) {
    const double mu = decisions.mu[l];
    if (mu != 0.0 && mu != params.mu_max.at(l))
      throw ContractViolation("decision: relay " + std::to_string(l) + " power must be 0 or mu_max");
  }
}

}  // namespace wsnkf
