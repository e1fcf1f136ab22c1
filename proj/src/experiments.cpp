#include "wsnkf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wsnkf/error.hpp"
#include "wsnkf/link.hpp"

namespace wsnkf {

RunMetrics mean_metrics(std::span<const RunMetrics> runs) {
  RunMetrics m;
  const double n = static_cast<double>(runs.size());
  double eff = 0.0;
  int eff_n = 0;
  for (const auto& r : runs) {
    m.steps += r.steps;
    m.V_bar += r.V_bar / n;
    m.phi += r.phi / n;
    m.D_emp += r.D_emp / n;
    m.E_total += r.E_total / n;
    m.relay_slots += r.relay_slots;
    m.relay_delivered += r.relay_delivered;
    if (r.relay_efficiency) {
      eff += *r.relay_efficiency;
      ++eff_n;
    }
  }
  if (eff_n > 0) m.relay_efficiency = eff / eff_n;
  return m;
}

ReplicatedMetrics run_replicated(const Scenario& sc) {
  ReplicatedMetrics out;
  RunOptions opt;
  opt.keep_trace = false;
  for (int rep = 0; rep < sc.replications; ++rep) out.runs.push_back(run_scenario(sc, rep, opt).metrics);
  out.mean = mean_metrics(out.runs);
  return out;
}

namespace {
double rel_change(double x, double ref) { return ref != 0.0 ? (x - ref) / ref : 0.0; }
}  // namespace

std::vector<ComparisonRow> compare_controllers(const std::vector<std::pair<std::string, Scenario>>& variants) {
  std::vector<ComparisonRow> rows;
  for (const auto& [label, sc] : variants) {
    ComparisonRow row;
    row.label = label;
    row.metrics = run_replicated(sc).mean;
    rows.push_back(row);
  }
  if (!rows.empty()) {
    const RunMetrics ref = rows.front().metrics;
    for (auto& r : rows) {
      r.energy_change = rel_change(r.metrics.E_total, ref.E_total);
      r.phi_change = rel_change(r.metrics.phi, ref.phi);
      r.D_change = rel_change(r.metrics.D_emp, ref.D_emp);
      r.V_change = rel_change(r.metrics.V_bar, ref.V_bar);
    }
  }
  return rows;
}

SweepParam sweep_param_from_string(const std::string& s) {
  if (s == "energy_weight") return SweepParam::EnergyWeight;
  if (s == "u_max") return SweepParam::UMax;
  if (s == "increment") return SweepParam::Increment;
  if (s == "mu_max") return SweepParam::MuMax;
  throw ConfigError("unknown sweep parameter '" + s + "' (energy_weight, u_max, increment, mu_max)");
}

const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::EnergyWeight: return "energy_weight";
    case SweepParam::UMax: return "u_max";
    case SweepParam::Increment: return "increment";
    case SweepParam::MuMax: return "mu_max";
  }
  return "?";
}

Scenario with_param(const Scenario& sc, SweepParam p, double value) {
  Scenario out = sc;
  switch (p) {
    case SweepParam::EnergyWeight:
      out.controller.energy_weight = value;
      break;
    case SweepParam::UMax:
      for (auto& u : out.energy.u_max) u = value;
      for (auto& u : out.u_init) u = std::min(u, value);
      break;
    case SweepParam::Increment:
      out.controller.increments = {-value, value};
      break;
    case SweepParam::MuMax:
      for (auto& r : out.relays) r.mu_max = value;
      for (auto& mu : out.energy.mu_max) mu = value;
      break;
  }
  out.validate();
  return out;
}

std::vector<std::pair<double, RunMetrics>> sweep(const Scenario& sc, SweepParam p, const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("sweep grid must not be empty");
  std::vector<std::pair<double, RunMetrics>> out;
  for (double v : grid) out.emplace_back(v, run_replicated(with_param(sc, p, v)).mean);
  return out;
}

EnergyMatch match_energy(const Scenario& sc, double target, double lo, double hi, double rel_tol, int max_runs) {
  if (!(lo > 0.0 && hi > lo)) throw ConfigError("match_energy: need 0 < lo < hi");
  EnergyMatch best;
  double best_err = std::numeric_limits<double>::infinity();
  auto run = [&](double w) {
    const RunMetrics m = run_replicated(with_param(sc, SweepParam::EnergyWeight, w)).mean;
    ++best.runs;
    const double err = std::abs(m.E_total - target) / target;
    if (err < best_err) {
      best_err = err;
      best.energy_weight = w;
      best.metrics = m;
      best.matched = err <= rel_tol;
    }
    return m.E_total;
  };
  // Energy falls as ϱ grows.
  double a = std::log(lo), b = std::log(hi);
  const double e_lo = run(lo);
  if (best.matched || e_lo < target) return best;
  const double e_hi = run(hi);
  if (best.matched || e_hi > target) return best;
  while (best.runs < max_runs && !best.matched) {
    const double mid = 0.5 * (a + b);
    const double e = run(std::exp(mid));
    if (e > target) a = mid;
    else b = mid;
  }
  return best;
}

BoundReport verify_bound(const Scenario& sc, int replications, int k_max) {
  BoundReport rep;
  rep.replications = replications;
  const PlantModel& design = sc.design_model();
  rep.params = bound_constants(design);
  double max_bits = 0.0;
  for (const auto& s : design.sensors) max_bits = std::max(max_bits, s.max_rate());
  const bool sdc_only = sc.controller.menu.size() == 1 && sc.controller.menu[0] == SchemeKind::Sdc;
  bool floor_ok = sc.controller.u_min > 0.0;
  for (double u : sc.u_init) floor_ok = floor_ok && u >= sc.controller.u_min;
  rep.nu_certified = certified_nu_bound(sc.channel.ber, sc.controller.u_min, max_bits, design.sensor_count());
  const double rho = rep.nu_certified * rep.params.A_norm2;
  rep.certified = sdc_only && floor_ok && sc.controller_kind == ControllerKind::Predictive && rho < 1.0;
  rep.params.decay_rate = std::min(rho, 1.0 - 1e-12);

  Scenario run = sc;
  run.horizon = k_max + 1;
  run.replications = 1;
  rep.mean_norm.assign(k_max + 1, 0.0);
  RunOptions opt;
  opt.keep_trace = false;
  for (int r = 0; r < replications; ++r) {
    const RunResult res = run_scenario(run, r, opt);
    for (int k = 0; k <= k_max; ++k) rep.mean_norm[k] += res.norm_prior[k] / replications;
  }
  rep.bound = bound_curve(rep.params, design.P0, design.Q, k_max);
  rep.all_pass = true;
  for (int k = 0; k <= k_max; ++k)
    if (rep.mean_norm[k] > rep.bound[k]) rep.all_pass = false;
  return rep;
}

NuEstimate estimate_nu(const Scenario& sc, std::size_t draws, std::size_t stride, int replication) {
  if (draws == 0 || stride == 0) throw ConfigError("estimate_nu: draws and stride must be positive");
  NuEstimate est;
  const int M = sc.sensor_count();
  const int L = sc.relay_count();
  const LinkLayout lay{M, L};
  const PlantModel& design = sc.design_model();
  RandomStream rng = RandomStream::derive(sc.seed, "nu-estimate", replication);

  RunOptions opt;
  opt.keep_trace = false;
  opt.on_decision = [&](const StepView& v) {
    if (static_cast<std::size_t>(v.k) % stride != 0) return;
    std::size_t deficient = 0;
    ChannelGains cg;
    cg.sensor_gw.resize(M);
    cg.sensor_relay.assign(L, std::vector<double>(M));
    cg.relay_gw.resize(L);
    for (std::size_t d = 0; d < draws; ++d) {
      for (int i = 0; i < lay.count(); ++i) {
        const LinkConfig& lc = lay.config(sc, i);
        const LinkState next = ar_step(LinkState{(*v.gains_now)[i], {}}, lc.ar, rng);
        const double g2 = lc.ar.power_gain(next.g);
        if (i < M) cg.sensor_gw[i] = g2;
        else if (i < M + L * M) cg.sensor_relay[(i - M) / M][(i - M) % M] = g2;
        else cg.relay_gw[i - M - L * M] = g2;
      }
      const auto outcome = draw_outcomes(*v.next, sc.relays, cg, sc.channel.ber, rng);
      const auto flags = reconstruct_flags(outcome, *v.next, sc.relays);
      if (!pattern_full_rank(design, flags.theta)) ++deficient;
    }
    est.per_state.push_back(static_cast<double>(deficient) / static_cast<double>(draws));
    est.samples += draws;
  };
  run_scenario(sc, replication, opt);
  if (est.per_state.empty()) throw NumericalError("estimate_nu: no states visited");
  double sum = 0.0;
  for (double p : est.per_state) {
    est.max = std::max(est.max, p);
    sum += p;
  }
  est.mean = sum / static_cast<double>(est.per_state.size());
  return est;
}

MdcCurve mdc_curve(double b, double u, const BerModel& ber, const std::vector<double>& gain_dB,
                   const ControllerConfig& cfg) {
  MdcCurve c;
  c.gain_dB = gain_dB;
  c.labels.push_back("SDC");
  std::vector<std::vector<SchemeSpec>> groups{{SchemeSpec::sdc(b)}};
  for (int J : cfg.mdc_descriptions) {
    ControllerConfig one = cfg;
    one.mdc_descriptions = {J};
    groups.push_back(mdc_candidates(b, one));
    c.labels.push_back("MDC" + std::to_string(J));
  }
  c.distortion.assign(groups.size(), std::vector<double>(gain_dB.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i = 0; i < gain_dB.size(); ++i) {
      const double g2 = db_to_power(gain_dB[i]);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : groups[g])
        best = std::min(best, expected_scheme_distortion(s, packet_success(u, g2, s.packet_bits(), ber), 1.0));
      c.distortion[g][i] = best;
    }
  }
  return c;
}

std::vector<std::pair<double, std::pair<std::string, std::string>>> curve_crossovers(const MdcCurve& c) {
  std::vector<std::pair<double, std::pair<std::string, std::string>>> out;
  int prev = -1;
  for (std::size_t i = 0; i < c.gain_dB.size(); ++i) {
    int arg = 0;
    for (std::size_t g = 1; g < c.distortion.size(); ++g)
      if (c.distortion[g][i] < c.distortion[arg][i]) arg = static_cast<int>(g);
    if (prev >= 0 && arg != prev) out.push_back({c.gain_dB[i], {c.labels[prev], c.labels[arg]}});
    prev = arg;
  }
  return out;
}

nlohmann::json bound_report_to_json(const BoundReport& r) {
  nlohmann::json j;
  j["c"] = r.params.c;
  j["varpi"] = r.params.varpi;
  j["A_norm2"] = r.params.A_norm2;
  j["rho"] = r.params.decay_rate;
  j["nu_certified"] = r.nu_certified;
  j["certified"] = r.certified;
  j["replications"] = r.replications;
  j["all_pass"] = r.all_pass;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < r.bound.size(); ++k)
    rows.push_back({{"k", k}, {"bound", r.bound[k]}, {"mean_norm", r.mean_norm[k]},
                    {"pass", r.mean_norm[k] <= r.bound[k]}});
  j["curve"] = rows;
  return j;
}

nlohmann::json fsmc_to_json(const FsmcModel& f) {
  nlohmann::json j;
  // The outer edges 0 and ∞ have no dB value and are written as null.
  nlohmann::json th_db = nlohmann::json::array();
  for (double t : f.thresholds)
    th_db.push_back(t > 0.0 && std::isfinite(t) ? nlohmann::json(power_to_db(t)) : nlohmann::json(nullptr));
  std::vector<double> gains_db;
  for (double g : f.state_gains) gains_db.push_back(power_to_db(g));
  j["states"] = f.size();
  j["thresholds_dB"] = th_db;
  j["state_gains_dB"] = gains_db;
  nlohmann::json P = nlohmann::json::array();
  for (Eigen::Index r = 0; r < f.P.rows(); ++r) {
    std::vector<double> row(f.P.cols());
    for (Eigen::Index c = 0; c < f.P.cols(); ++c) row[c] = f.P(r, c);
    P.push_back(row);
  }
  j["P"] = P;
  return j;
}

}  // namespace wsnkf
