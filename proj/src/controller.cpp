#include "wsnkf/controller.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "wsnkf/error.hpp"

namespace wsnkf {

bool ControllerConfig::allows(SchemeKind k) const {
  return std::find(menu.begin(), menu.end(), k) != menu.end();
}

void ControllerConfig::validate() const {
  if (!(energy_weight >= 0.0)) throw ConfigError("controller.energy_weight must be >= 0");
  if (increments.empty()) throw ConfigError("controller.increments must not be empty");
  if (menu.empty() || !allows(SchemeKind::Sdc))
    throw ConfigError("controller.menu must contain SDC");
  for (int J : mdc_descriptions)
    if (J < 2) throw ConfigError("controller.mdc_descriptions entries must be >= 2");
  for (double a : mdc_redundancy)
    if (!(a >= 0.0)) throw ConfigError("controller.mdc_redundancy entries must be >= 0");
  if (allows(SchemeKind::Mdc) && mdc_descriptions.empty())
    throw ConfigError("controller.mdc_descriptions must not be empty when MDC is allowed");
  if (outcome_cap < 1) throw ConfigError("controller.outcome_cap must be >= 1");
  if (!(u_min >= 0.0)) throw ConfigError("controller.u_min must be >= 0");
  if (!(threshold > 0.0)) throw ConfigError("controller.threshold must be > 0");
  for (std::size_t i = 1; i < bit_table.size(); ++i)
    if (!(bit_table[i].first < bit_table[i - 1].first))
      throw ConfigError("controller.bit_table edges must be descending");
}

double apply_increment(double u_prev, double du, double u_max, double u_min) {
  return std::clamp(u_prev + du, u_min, u_max);
}

std::vector<SchemeSpec> mdc_candidates(double b, const ControllerConfig& cfg) {
  std::vector<SchemeSpec> out;
  for (int J : cfg.mdc_descriptions) {
    const double full = b / J;
    std::vector<double> grid;
    for (double a : cfg.mdc_redundancy)
      if (a <= full + 1e-12) grid.push_back(std::min(a, full));
    if (cfg.mdc_full_redundancy) grid.push_back(full);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double x, double y) { return std::abs(x - y) <= 1e-12; }),
               grid.end());
    for (double a : grid) out.push_back(SchemeSpec::mdc(b, J, a));
  }
  return out;
}

namespace {

constexpr double kTieEps = 1e-12;

struct Option {
  SensorDecision d;
  std::vector<double> pmf;      // P(count = j), j = 0..packets
  std::vector<double> noise;    // R_m + D_m(j)
  std::vector<double> relay_q;  // [l]: P(relay l overhears the whole payload)
};

class Evaluator {
 public:
  Evaluator(const Matrix& P, const ControllerContext& ctx, std::size_t cap)
      : P_(P), ctx_(ctx), cap_(cap), M_(ctx.design->sensor_count()),
        L_(static_cast<int>(ctx.relays.size())) {
    if (static_cast<int>(ctx.source_var.size()) != M_ ||
        static_cast<int>(ctx.beliefs.sensor_gw.size()) != M_)
      throw ContractViolation("controller context: per-sensor inputs must have M entries");
    if (static_cast<int>(ctx.beliefs.relay_gw.size()) != L_ ||
        static_cast<int>(ctx.beliefs.sensor_relay.size()) != L_)
      throw ContractViolation("controller context: per-relay beliefs must have L entries");
    base_trace_ = P_.trace();
    work_.resize(P_.rows(), P_.cols());
    pc_.resize(P_.rows());
    count_.assign(M_, 0);
    relay_bit_.assign(L_, 0);
    direct_.assign(M_, 0);
    avail_.assign(M_, 0);
  }

  Option make_option(int m, const SensorDecision& d) const {
    Option o;
    o.d = d;
    const SchemeSpec& s = d.scheme;
    const int J = s.packets();
    const double var = ctx_.source_var[m];
    const double R = ctx_.design->sensors[m].R;
    o.pmf.assign(J + 1, 0.0);
    for (const auto& [g2, w] : ctx_.beliefs.sensor_gw[m].support) {
      const double p = packet_success(d.u, g2, s.packet_bits(), ctx_.ber);
      for (int j = 0; j <= J; ++j) o.pmf[j] += w * binomial_pmf(J, j, p);
    }
    o.noise.resize(J + 1);
    for (int j = 0; j <= J; ++j) o.noise[j] = R + realized_distortion(s, j, var);
    o.relay_q.assign(L_, 0.0);
    for (int l = 0; l < L_; ++l) {
      const auto& set = ctx_.relays[l].sensors;
      if (std::find(set.begin(), set.end(), m) == set.end()) continue;
      o.relay_q[l] = expected_success(d.u, ctx_.beliefs.sensor_relay[l][m], payload_bits(d), ctx_.ber);
    }
    return o;
  }

  double relay_bits(int l, const std::vector<const Option*>& opts) const {
    double b = 0.0;
    for (int m : ctx_.relays[l].sensors) b = std::max(b, payload_bits(opts[m]->d));
    return b;
  }

  double energy(const std::vector<const Option*>& opts, const std::vector<double>& mu) const {
    const EnergyParams& e = ctx_.energy;
    double total = 0.0;
    for (int m = 0; m < M_; ++m) {
      const auto& d = opts[m]->d;
      if (d.u > 0.0) total += payload_bits(d) * d.u / e.r + e.processing;
    }
    for (int l = 0; l < L_; ++l) {
      const double b = relay_bits(l, opts);
      if (mu[l] > 0.0 && b > 0.0) total += b * mu[l] / e.r + e.processing;
    }
    return total;
  }

  double expected_trace(const std::vector<const Option*>& opts, const std::vector<double>& mu) {
    // Outcome-space size, counted before pruning zero-probability branches.
    double space = std::pow(2.0, L_);
    for (int m = 0; m < M_; ++m) space *= static_cast<double>(opts[m]->pmf.size());
    if (space > static_cast<double>(cap_))
      throw SearchSpaceTooLarge("outcome space of " + std::to_string(static_cast<long long>(space)) +
                                " exceeds the cap of " + std::to_string(cap_));

    rho_.assign(L_, 0.0);
    for (int l = 0; l < L_; ++l) {
      const auto& set = ctx_.relays[l].sensors;
      if (mu[l] <= 0.0 || set.empty()) continue;
      double q = 1.0;
      for (int m : set) q *= opts[m]->relay_q[l];
      if (q <= 0.0) continue;
      rho_[l] = q * expected_success(mu[l], ctx_.beliefs.relay_gw[l], relay_bits(l, opts), ctx_.ber);
    }
    opts_ = &opts;
    acc_ = 0.0;
    recurse_sensor(0, 1.0);
    return acc_;
  }

 private:
  void recurse_sensor(int m, double prob) {
    if (m == M_) {
      recurse_relay(0, prob);
      return;
    }
    const auto& pmf = (*opts_)[m]->pmf;
    for (std::size_t j = 0; j < pmf.size(); ++j) {
      if (pmf[j] == 0.0) continue;
      count_[m] = static_cast<int>(j);
      recurse_sensor(m + 1, prob * pmf[j]);
    }
  }

  void recurse_relay(int l, double prob) {
    if (l == L_) {
      acc_ += prob * leaf_trace();
      return;
    }
    const double r = rho_[l];
    if (r < 1.0) {
      relay_bit_[l] = 0;
      recurse_relay(l + 1, prob * (1.0 - r));
    }
    if (r > 0.0) {
      relay_bit_[l] = 1;
      recurse_relay(l + 1, prob * r);
    }
  }

  double leaf_trace() {
    const auto& opts = *opts_;
    for (int m = 0; m < M_; ++m) {
      direct_[m] = count_[m] == opts[m]->d.scheme.packets() ? 1 : 0;
      avail_[m] = direct_[m];
    }
    for (int l = 0; l < L_; ++l) {
      if (!relay_bit_[l]) continue;
      const auto& set = ctx_.relays[l].sensors;
      for (int m : set) {
        if (direct_[m]) continue;
        bool others = true;
        for (int o : set)
          if (o != m && !direct_[o]) others = false;
        if (others) avail_[m] = 1;
      }
    }
    bool any = false;
    work_ = P_;
    for (int m = 0; m < M_; ++m) {
      const auto& d = opts[m]->d;
      const auto& s = d.scheme;
      int eff = 0;
      switch (s.kind) {
        case SchemeKind::Sdc:
          eff = avail_[m];
          break;
        case SchemeKind::Mdc:
          eff = (avail_[m] && !direct_[m]) ? s.packets() : count_[m];
          break;
        case SchemeKind::Zec:
          if (s.dominant == m) {
            eff = avail_[m];
          } else {
            const bool powered = d.u * opts[s.dominant]->d.u > 0.0;
            eff = powered && avail_[m] && avail_[s.dominant] ? 1 : 0;
          }
          break;
      }
      if (eff == 0) continue;
      any = true;
      const RowVector& c = ctx_.design->sensors[m].C;
      pc_.noalias() = work_ * c.transpose();
      const double sv = c.dot(pc_) + opts[m]->noise[eff];
      if (!(sv > 0.0)) throw NumericalError("expected_posterior_trace: non-positive innovation variance");
      work_.noalias() -= (pc_ * pc_.transpose()) / sv;
    }
    return any ? work_.trace() : base_trace_;
  }

  const Matrix& P_;
  const ControllerContext& ctx_;
  std::size_t cap_;
  int M_;
  int L_;
  double base_trace_ = 0.0;
  Matrix work_;
  Vector pc_;
  std::vector<int> count_, relay_bit_, direct_, avail_;
  std::vector<double> rho_;
  const std::vector<const Option*>* opts_ = nullptr;
  double acc_ = 0.0;
};

struct Best {
  bool set = false;
  CostBreakdown cost;
  double rate = 0.0;
  std::vector<const Option*> opts;
  std::vector<double> mu;

  bool improves(const CostBreakdown& c, double total_rate) const {
    if (!set) return true;
    const double scale = std::max(std::abs(c.total), std::abs(cost.total));
    if (c.total < cost.total - kTieEps * scale) return true;
    if (c.total > cost.total + kTieEps * scale) return false;
    const double escale = std::max(c.energy, cost.energy);
    if (c.energy < cost.energy - kTieEps * escale) return true;
    if (c.energy > cost.energy + kTieEps * escale) return false;
    return total_rate < rate - 1e-12;
  }
};

std::vector<std::vector<double>> relay_patterns(const ControllerContext& ctx, const ControllerConfig& cfg) {
  const int L = static_cast<int>(ctx.relays.size());
  std::vector<std::vector<double>> out;
  switch (cfg.relay_mode) {
    case RelayMode::Off:
      out.push_back(std::vector<double>(L, 0.0));
      break;
    case RelayMode::AlwaysOn: {
      std::vector<double> mu(L);
      for (int l = 0; l < L; ++l) mu[l] = ctx.relays[l].mu_max;
      out.push_back(mu);
      break;
    }
    case RelayMode::OnOff:
      for (unsigned mask = 0; mask < (1u << L); ++mask) {
        std::vector<double> mu(L, 0.0);
        for (int l = 0; l < L; ++l)
          if (mask & (1u << l)) mu[l] = ctx.relays[l].mu_max;
        out.push_back(mu);
      }
      break;
  }
  return out;
}

/// (du, u, b) lattice of one sensor, in increment-major order.
std::vector<SensorDecision> base_decisions(int m, const ControllerContext& ctx, const ControllerConfig& cfg) {
  std::vector<SensorDecision> out;
  const double u_max = ctx.energy.u_max.at(m);
  for (double du : cfg.increments) {
    const double u = apply_increment(ctx.u_prev.at(m), du, u_max, cfg.u_min);
    for (double b : ctx.rate_sets.at(m)) out.push_back(SensorDecision{du, u, SchemeSpec::sdc(b)});
  }
  return out;
}

double belief_distortion(const SchemeSpec& s, double u, const GainBelief& belief, double var,
                         const BerModel& ber) {
  double d = 0.0;
  for (const auto& [g2, w] : belief.support)
    d += w * expected_scheme_distortion(s, packet_success(u, g2, s.packet_bits(), ber), var);
  return d;
}

DecisionSet to_decision(const std::vector<const Option*>& opts, const std::vector<double>& mu) {
  DecisionSet S;
  for (const Option* o : opts) S.sensors.push_back(o->d);
  S.mu = mu;
  return S;
}

}  // namespace

double expected_posterior_trace(const Matrix& P_next_prior, const DecisionSet& S,
                                const ControllerContext& ctx, std::size_t cap) {
  Evaluator ev(P_next_prior, ctx, cap);
  std::vector<Option> options;
  options.reserve(S.sensors.size());
  for (std::size_t m = 0; m < S.sensors.size(); ++m)
    options.push_back(ev.make_option(static_cast<int>(m), S.sensors[m]));
  std::vector<const Option*> ptrs;
  for (const auto& o : options) ptrs.push_back(&o);
  std::vector<double> mu = S.mu;
  mu.resize(ctx.relays.size(), 0.0);
  return ev.expected_trace(ptrs, mu);
}

double expected_energy(const DecisionSet& S, const ControllerContext& ctx) {
  const EnergyParams& e = ctx.energy;
  double total = 0.0;
  for (const auto& d : S.sensors)
    if (d.u > 0.0) total += payload_bits(d) * d.u / e.r + e.processing;
  for (std::size_t l = 0; l < ctx.relays.size() && l < S.mu.size(); ++l) {
    double b = 0.0;
    for (int m : ctx.relays[l].sensors) b = std::max(b, payload_bits(S.sensors[m]));
    if (S.mu[l] > 0.0 && b > 0.0) total += b * S.mu[l] / e.r + e.processing;
  }
  return total;
}

CostBreakdown evaluate_cost(const Matrix& P_next_prior, const DecisionSet& S,
                            const ControllerContext& ctx, const ControllerConfig& cfg) {
  CostBreakdown c;
  c.expected_trace = expected_posterior_trace(P_next_prior, S, ctx, cfg.outcome_cap);
  c.energy = expected_energy(S, ctx);
  c.total = c.expected_trace + cfg.energy_weight * c.energy;
  return c;
}

OptimizeResult optimize(const Matrix& P_next_prior, const ControllerContext& ctx,
                        const ControllerConfig& cfg) {
  if (ctx.design == nullptr) throw ContractViolation("optimize: context has no design model");
  const int M = ctx.design->sensor_count();
  Evaluator ev(P_next_prior, ctx, cfg.outcome_cap);
  const auto mus = relay_patterns(ctx, cfg);
  const bool use_zec = cfg.allows(SchemeKind::Zec) && M >= 2;
  const bool use_mdc = cfg.allows(SchemeKind::Mdc);

  // Per sensor: candidate options (exhaustive) or one option per (du, b)
  // after the SDC-vs-MDC pre-selection (two-stage).
  std::vector<std::vector<Option>> per_sensor(M);
  for (int m = 0; m < M; ++m) {
    for (const auto& base : base_decisions(m, ctx, cfg)) {
      const double b = base.scheme.rate;
      if (cfg.search == SearchMode::Exhaustive) {
        per_sensor[m].push_back(ev.make_option(m, base));
        if (use_mdc)
          for (const auto& s : mdc_candidates(b, cfg))
            per_sensor[m].push_back(ev.make_option(m, SensorDecision{base.du, base.u, s}));
      } else {
        SchemeSpec chosen = base.scheme;
        if (use_mdc) {
          const auto& belief = ctx.beliefs.sensor_gw[m];
          const double var = ctx.source_var[m];
          double best = belief_distortion(chosen, base.u, belief, var, ctx.ber);
          for (const auto& s : mdc_candidates(b, cfg)) {
            const double d = belief_distortion(s, base.u, belief, var, ctx.ber);
            if (d < best * (1.0 - kTieEps)) {
              best = d;
              chosen = s;
            }
          }
        }
        per_sensor[m].push_back(ev.make_option(m, SensorDecision{base.du, base.u, chosen}));
      }
    }
  }

  Best best;
  std::size_t evaluated = 0;
  std::vector<const Option*> current(M, nullptr);

  auto consider = [&](const std::vector<const Option*>& opts) {
    double rate = 0.0;
    for (const Option* o : opts) rate += o->d.scheme.coded_rate;
    for (const auto& mu : mus) {
      CostBreakdown c;
      c.expected_trace = ev.expected_trace(opts, mu);
      c.energy = ev.energy(opts, mu);
      c.total = c.expected_trace + cfg.energy_weight * c.energy;
      ++evaluated;
      if (best.improves(c, rate)) {
        best.set = true;
        best.cost = c;
        best.rate = rate;
        best.opts = opts;
        best.mu = mu;
      }
    }
  };

  // ZEC options are built on demand; a deque keeps them addressable.
  std::deque<Option> zec_store;
  auto zec_pair = [&](int dom, int dep, const SensorDecision& a, const SensorDecision& b) {
    Eigen::Matrix2d cov;
    cov << ctx.meas_cov(dom, dom), ctx.meas_cov(dom, dep), ctx.meas_cov(dep, dom), ctx.meas_cov(dep, dep);
    const ZecRates r = zec_rates(cov, {a.scheme.rate, b.scheme.rate}, 0);
    zec_store.push_back(
        ev.make_option(dom, SensorDecision{a.du, a.u, SchemeSpec::zec(a.scheme.rate, r.dominant, dom)}));
    const Option* od = &zec_store.back();
    zec_store.push_back(
        ev.make_option(dep, SensorDecision{b.du, b.u, SchemeSpec::zec(b.scheme.rate, r.dependent, dom)}));
    return std::pair<const Option*, const Option*>{od, &zec_store.back()};
  };

  // Joint lattice over sensors.
  std::vector<std::size_t> index(M, 0);
  bool done = per_sensor.empty();
  for (int m = 0; m < M; ++m)
    if (per_sensor[m].empty()) done = true;
  if (done) throw ContractViolation("optimize: empty admissible set");
  while (!done) {
    for (int m = 0; m < M; ++m) current[m] = &per_sensor[m][index[m]];
    consider(current);

    if (use_zec) {
      for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
          if (i == j) continue;
          const auto& di = current[i]->d;
          const auto& dj = current[j]->d;
          if (di.scheme.kind != SchemeKind::Sdc || dj.scheme.kind != SchemeKind::Sdc) continue;
          const auto [od, op] = zec_pair(i, j, di, dj);
          std::vector<const Option*> alt = current;
          alt[i] = od;
          alt[j] = op;
          consider(alt);
        }
      }
    }

    // Advance the mixed-radix counter, last sensor fastest.
    int m = M - 1;
    while (m >= 0) {
      if (++index[m] < per_sensor[m].size()) break;
      index[m] = 0;
      --m;
    }
    done = m < 0;
  }

  OptimizeResult res;
  res.decision = to_decision(best.opts, best.mu);
  res.cost = best.cost;
  res.candidates = evaluated;
  return res;
}

DecisionSet simple_logic(const std::vector<double>& g_pred, const std::vector<double>& u_prev,
                         const ControllerConfig& cfg, const EnergyParams& energy,
                         const std::vector<std::vector<double>>& rate_sets, std::size_t relays) {
  double delta = 0.0;
  for (double du : cfg.increments) delta = std::max(delta, std::abs(du));
  DecisionSet S;
  for (std::size_t m = 0; m < g_pred.size(); ++m) {
    const double g = g_pred[m];
    const double du = g * u_prev[m] > cfg.threshold ? -delta : delta;
    double u = u_prev[m] + du;
    if (u < cfg.u_min - 1e-18 || u > energy.u_max.at(m) * (1.0 + 1e-12)) u = u_prev[m];
    u = std::clamp(u, 0.0, energy.u_max.at(m));

    const double g_dB = g > 0.0 ? power_to_db(g) : -std::numeric_limits<double>::infinity();
    double bits = cfg.bit_floor;
    for (const auto& [edge, b] : cfg.bit_table) {
      if (g_dB >= edge) {
        bits = b;
        break;
      }
    }
    // Largest admissible rate not above the table value.
    const auto& rates = rate_sets.at(m);
    double b = rates.front();
    for (double r : rates)
      if (r <= bits + 1e-12) b = r;
    S.sensors.push_back(SensorDecision{u - u_prev[m], u, SchemeSpec::sdc(b)});
  }
  S.mu.assign(relays, 0.0);
  return S;
}

}  // namespace wsnkf
