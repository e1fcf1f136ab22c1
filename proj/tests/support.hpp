#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "wsnkf/channel.hpp"
#include "wsnkf/codec.hpp"
#include "wsnkf/controller.hpp"
#include "wsnkf/link.hpp"
#include "wsnkf/plant.hpp"
#include "wsnkf/random.hpp"

namespace wsnkf::testing {

inline PlantModel reference_plant() {
  PlantModel p;
  p.A = Matrix(2, 2);
  p.A << 1.6718, -0.9948, 1.0, 0.0;
  p.Q = 0.5 * Matrix::Identity(2, 2);
  p.P0 = 0.3 * Matrix::Identity(2, 2);
  const std::vector<double> rates{3, 4, 5, 6, 7, 8};
  SensorSpec s1{RowVector(2), 0.01, rates, std::nullopt};
  s1.C << 1.0, 0.0;
  SensorSpec s2{RowVector(2), 0.01, rates, std::nullopt};
  s2.C << 0.0, 1.0;
  p.sensors = {s1, s2};
  return p;
}

inline Matrix random_spd(int n, RandomStream& rng, double scale = 1.0) {
  Matrix B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = rng.normal();
  return scale * (B * B.transpose() + 0.1 * Matrix::Identity(n, n));
}

inline double uniform(RandomStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline GainBelief random_belief(RandomStream& rng, int max_support) {
  const int n = 1 + static_cast<int>(rng.uniform() * max_support);
  GainBelief b;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = uniform(rng, 0.1, 1.0);
    b.support.emplace_back(db_to_power(uniform(rng, -125.0, -95.0)), w);
    total += w;
  }
  for (auto& [g, p] : b.support) p /= total;
  return b;
}

/// Context for the reference plant with L relays over both sensors and random
/// gain beliefs.
inline ControllerContext random_context(const PlantModel& plant, int L, RandomStream& rng, int max_support = 3) {
  ControllerContext ctx;
  ctx.design = &plant;
  ctx.source_var = measurement_variances(plant);
  ctx.meas_cov = measurement_covariance(plant);
  const int M = plant.sensor_count();
  for (const auto& s : plant.sensors) ctx.rate_sets.push_back(s.rate_set);
  for (int l = 0; l < L; ++l) {
    RelaySpec r;
    for (int m = 0; m < M; ++m) r.sensors.push_back(m);
    ctx.relays.push_back(r);
  }
  ctx.ber = BerModel::exponential();
  ctx.energy.u_max.assign(M, 3e-4);
  ctx.energy.mu_max.assign(L, 1e-4);
  for (int m = 0; m < M; ++m) {
    ctx.u_prev.push_back(uniform(rng, 0.0, 3e-4));
    ctx.beliefs.sensor_gw.push_back(random_belief(rng, max_support));
  }
  ctx.beliefs.sensor_relay.resize(L);
  for (int l = 0; l < L; ++l) {
    for (int m = 0; m < M; ++m) ctx.beliefs.sensor_relay[l].push_back(random_belief(rng, max_support));
    ctx.beliefs.relay_gw.push_back(random_belief(rng, max_support));
  }
  return ctx;
}

/// Batch measurement update written out directly:
/// P - P Cᵀ (C P Cᵀ + R)⁻¹ C P over the given rows.
inline Matrix textbook_posterior(const Matrix& P, const Matrix& C, const Vector& R) {
  if (C.rows() == 0) return P;
  const Matrix S = C * P * C.transpose() + Matrix(R.asDiagonal());
  const Matrix K = P * C.transpose() * S.inverse();
  return P - K * C * P;
}

/// E{tr P(k+1|k+1)} by enumerating every link gain in the belief supports and
/// every individual arrival bit, then applying the reconstruction rules.
inline double brute_force_trace(const Matrix& P, const DecisionSet& S, const ControllerContext& ctx) {
  const PlantModel& plant = *ctx.design;
  const int M = plant.sensor_count();
  const int L = static_cast<int>(ctx.relays.size());

  // Flat list of links and their beliefs.
  std::vector<const GainBelief*> beliefs;
  for (int m = 0; m < M; ++m) beliefs.push_back(&ctx.beliefs.sensor_gw[m]);
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m) beliefs.push_back(&ctx.beliefs.sensor_relay[l][m]);
  for (int l = 0; l < L; ++l) beliefs.push_back(&ctx.beliefs.relay_gw[l]);

  double expected = 0.0;
  std::vector<std::size_t> gi(beliefs.size(), 0);
  while (true) {
    double p_gain = 1.0;
    std::vector<double> g(beliefs.size());
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
      g[i] = beliefs[i]->support[gi[i]].first;
      p_gain *= beliefs[i]->support[gi[i]].second;
    }

    // Bit slots: descriptions of every sensor, overhearing bits, relay bits.
    struct Bit {
      int kind;  // 0 gamma, 1 zeta, 2 gamma_tilde
      int a, b;
    };
    std::vector<Bit> bits;
    for (int m = 0; m < M; ++m)
      for (int d = 0; d < S.sensors[m].scheme.packets(); ++d) bits.push_back({0, m, d});
    for (int l = 0; l < L; ++l)
      for (int m : ctx.relays[l].sensors) bits.push_back({1, l, m});
    for (int l = 0; l < L; ++l) bits.push_back({2, l, 0});

    const std::uint64_t combos = std::uint64_t{1} << bits.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
      TransmissionOutcome o;
      o.gamma.resize(M);
      for (int m = 0; m < M; ++m) o.gamma[m].assign(S.sensors[m].scheme.packets(), 0);
      o.zeta.assign(L, std::vector<int>(M, 0));
      o.gamma_tilde.assign(L, 0);
      for (std::size_t i = 0; i < bits.size(); ++i) {
        const int v = (mask >> i) & 1;
        if (bits[i].kind == 0) o.gamma[bits[i].a][bits[i].b] = v;
        if (bits[i].kind == 1) o.zeta[bits[i].a][bits[i].b] = v;
        if (bits[i].kind == 2) o.gamma_tilde[bits[i].a] = v;
      }

      double p = p_gain;
      for (std::size_t i = 0; i < bits.size() && p > 0.0; ++i) {
        const int v = (mask >> i) & 1;
        double q = 0.0;
        if (bits[i].kind == 0) {
          const auto& d = S.sensors[bits[i].a];
          q = packet_success(d.u, g[bits[i].a], d.scheme.packet_bits(), ctx.ber);
        } else if (bits[i].kind == 1) {
          const int l = bits[i].a, m = bits[i].b;
          const auto& d = S.sensors[m];
          q = S.mu[l] > 0.0 ? packet_success(d.u, g[M + l * M + m], d.scheme.coded_rate, ctx.ber) : 0.0;
        } else {
          const int l = bits[i].a;
          bool all = S.mu[l] > 0.0;
          double payload = 0.0;
          for (int m : ctx.relays[l].sensors) {
            all = all && o.zeta[l][m] == 1;
            payload = std::max(payload, S.sensors[m].scheme.coded_rate);
          }
          q = all ? packet_success(S.mu[l], g[M + L * M + l], payload, ctx.ber) : 0.0;
        }
        p *= v ? q : 1.0 - q;
      }
      if (p == 0.0) continue;

      const ReconstructionFlags f = reconstruct_flags(o, S, ctx.relays);
      std::vector<int> rows;
      for (int m = 0; m < M; ++m)
        if (f.theta[m]) rows.push_back(m);
      Matrix C(rows.size(), plant.dim());
      Vector R(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const int m = rows[i];
        C.row(i) = plant.sensors[m].C;
        R(i) = plant.sensors[m].R + realized_distortion(S.sensors[m].scheme, f.received_count[m], ctx.source_var[m]);
      }
      expected += p * textbook_posterior(P, C, R).trace();
    }

    std::size_t i = 0;
    while (i < gi.size() && ++gi[i] == beliefs[i]->support.size()) gi[i++] = 0;
    if (i == gi.size()) break;
  }
  return expected;
}

/// A random admissible decision for the reference plant: each sensor picks SDC,
/// MDC or joins a ZEC pair; powers may be zero; relays randomly on.
inline DecisionSet random_decision(const ControllerContext& ctx, RandomStream& rng) {
  const int M = ctx.design->sensor_count();
  const int L = static_cast<int>(ctx.relays.size());
  DecisionSet S;
  auto pick_rate = [&](int m) {
    const auto& r = ctx.rate_sets[m];
    return r[static_cast<std::size_t>(rng.uniform() * r.size())];
  };
  auto pick_u = [&] { return rng.uniform() < 0.15 ? 0.0 : uniform(rng, 1e-5, 3e-4); };
  for (int m = 0; m < M; ++m) {
    const double b = pick_rate(m);
    const double kind = rng.uniform();
    SchemeSpec s = SchemeSpec::sdc(b);
    if (kind > 0.5) {
      const int J = rng.uniform() < 0.5 ? 2 : 3;
      const double a = std::min(b / J, static_cast<double>(static_cast<int>(rng.uniform() * 3)));
      s = SchemeSpec::mdc(b, J, a);
    }
    S.sensors.push_back(SensorDecision{0.0, pick_u(), s});
  }
  if (M >= 2 && rng.uniform() < 0.3) {
    Eigen::Matrix2d cov;
    cov << ctx.meas_cov(0, 0), ctx.meas_cov(0, 1), ctx.meas_cov(1, 0), ctx.meas_cov(1, 1);
    const double b0 = pick_rate(0), b1 = pick_rate(1);
    const ZecRates z = zec_rates(cov, {b0, b1}, 0);
    S.sensors[0].scheme = SchemeSpec::zec(b0, z.dominant, 0);
    S.sensors[1].scheme = SchemeSpec::zec(b1, z.dependent, 0);
  }
  for (int l = 0; l < L; ++l) S.mu.push_back(rng.uniform() < 0.5 ? ctx.energy.mu_max[l] : 0.0);
  return S;
}

}  // namespace wsnkf::testing
