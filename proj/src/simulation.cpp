#include "wsnkf/simulation.hpp"

#include <cmath>

#include "wsnkf/error.hpp"
#include "wsnkf/filter.hpp"
#include "wsnkf/link.hpp"

namespace wsnkf {

const LinkConfig& LinkLayout::config(const Scenario& sc, int link) const {
  if (link < M) return sc.channel.sensor_gw[link];
  if (link < M + L * M) return sc.channel.sensor_relay[(link - M) / M][(link - M) % M];
  return sc.channel.relay_gw[link - M - L * M];
}

std::string LinkLayout::name(int link) const {
  if (link < M) return "s" + std::to_string(link) + "_gw";
  if (link < M + L * M) {
    const int l = (link - M) / M;
    const int m = (link - M) % M;
    return "s" + std::to_string(m) + "_r" + std::to_string(l);
  }
  return "r" + std::to_string(link - M - L * M) + "_gw";
}

namespace {

LinkLayout layout_of(const Scenario& sc) { return LinkLayout{sc.sensor_count(), sc.relay_count()}; }

std::vector<Complex> ar_trace(const ArLinkModel& ar, RandomStream& rng, std::int64_t length) {
  std::vector<Complex> out(length);
  LinkState s = ar_initial(LinkId{}, ar, rng);
  for (std::int64_t t = 0; t < length; ++t) {
    out[t] = s.g;
    s = ar_step(s, ar, rng);
  }
  return out;
}

GainBelief belief_for(const LinkConfig& lc, Complex g_now, Complex g_next, const FsmcModel* fsmc) {
  switch (lc.prediction.mode) {
    case PredictionMode::Known: return GainBelief::point(lc.ar.power_gain(g_next));
    case PredictionMode::Predicted: return GainBelief::point(lc.ar.power_gain(lc.ar.a * g_now));
    case PredictionMode::Fixed: return GainBelief::point(db_to_power(lc.prediction.fixed_dB));
    case PredictionMode::Fsmc: return fsmc_belief(lc.ar.power_gain(g_now), *fsmc);
  }
  return GainBelief{};
}

}  // namespace

std::vector<std::vector<Complex>> generate_link_traces(const Scenario& sc, int replication,
                                                       std::int64_t length) {
  const LinkLayout lay = layout_of(sc);
  std::vector<std::vector<Complex>> out(lay.count());
  for (int i = 0; i < lay.count(); ++i) {
    RandomStream rng = RandomStream::derive(sc.seed, "link/" + lay.name(i), replication);
    out[i] = ar_trace(lay.config(sc, i).ar, rng, length);
  }
  return out;
}

std::vector<FsmcModel> build_link_fsmc(const Scenario& sc, int replication, bool all) {
  const LinkLayout lay = layout_of(sc);
  std::vector<FsmcModel> out(lay.count());
  for (int i = 0; i < lay.count(); ++i) {
    const LinkConfig& lc = lay.config(sc, i);
    if (!all && lc.prediction.mode != PredictionMode::Fsmc) continue;
    RandomStream rng = RandomStream::derive(sc.seed, "fsmc/" + lay.name(i), replication);
    const auto g = ar_trace(lc.ar, rng, static_cast<std::int64_t>(sc.channel.fsmc_training_length));
    std::vector<double> power(g.size());
    for (std::size_t t = 0; t < g.size(); ++t) power[t] = lc.ar.power_gain(g[t]);
    out[i] = build_fsmc_from_trace(power, sc.channel.fsmc_states);
  }
  return out;
}

DecisionSet initial_decision(const Scenario& sc) {
  DecisionSet S;
  for (int m = 0; m < sc.sensor_count(); ++m)
    S.sensors.push_back(
        SensorDecision{0.0, sc.u_init[m], SchemeSpec::sdc(sc.plant.sensors[m].max_rate())});
  S.mu.assign(sc.relay_count(), 0.0);
  return S;
}

RunResult run_scenario(const Scenario& sc, int replication, const RunOptions& options) {
  sc.validate();
  const PlantModel& truth = sc.plant;
  const PlantModel& design = sc.design_model();
  const int M = sc.sensor_count();
  const int L = sc.relay_count();
  const LinkLayout lay = layout_of(sc);
  const std::int64_t K = sc.horizon;

  // Quantizers and the gateway both work from the design model.
  const Matrix meas_cov = measurement_covariance(design);
  std::vector<double> source_var(M);
  for (int m = 0; m < M; ++m) source_var[m] = meas_cov(m, m);

  const auto gains = generate_link_traces(sc, replication, K + 1);
  const auto fsmc = build_link_fsmc(sc, replication);

  RandomStream plant_rng = RandomStream::derive(sc.seed, "plant", replication);
  std::vector<RandomStream> sensor_rng;
  for (int m = 0; m < M; ++m)
    sensor_rng.push_back(RandomStream::derive(sc.seed, "sensor/" + std::to_string(m), replication));

  ControllerContext ctx;
  ctx.design = &design;
  ctx.source_var = source_var;
  ctx.meas_cov = meas_cov;
  for (const auto& s : design.sensors) ctx.rate_sets.push_back(s.rate_set);
  ctx.relays = sc.relays;
  ctx.ber = sc.channel.ber;
  ctx.energy = sc.energy;
  ctx.u_prev.resize(M);
  ctx.beliefs.sensor_gw.resize(M);
  ctx.beliefs.sensor_relay.assign(L, std::vector<GainBelief>(M));
  ctx.beliefs.relay_gw.resize(L);

  PlantState x = initial_state(truth, plant_rng);
  FilterState fs = FilterState::initial(design);
  DecisionSet S = initial_decision(sc);

  RunResult result;
  result.replication = replication;
  result.norm_prior.reserve(K);
  if (options.keep_trace) result.trace.reserve(K);
  MetricsAccumulator acc;

  std::vector<Complex> g_now(lay.count());
  ChannelGains cg;
  cg.sensor_gw.resize(M);
  cg.sensor_relay.assign(L, std::vector<double>(M));
  cg.relay_gw.resize(L);
  std::vector<double> y_hat(M), distortion(M), relay_bits(L);

  for (std::int64_t k = 0; k < K; ++k) {
    for (int i = 0; i < lay.count(); ++i) g_now[i] = gains[i][k];
    for (int m = 0; m < M; ++m) cg.sensor_gw[m] = lay.config(sc, m).ar.power_gain(g_now[m]);
    for (int l = 0; l < L; ++l) {
      for (int m = 0; m < M; ++m) {
        const int i = lay.sensor_relay(l, m);
        cg.sensor_relay[l][m] = lay.config(sc, i).ar.power_gain(g_now[i]);
      }
      const int i = lay.relay_gw(l);
      cg.relay_gw[l] = lay.config(sc, i).ar.power_gain(g_now[i]);
    }

    // Sensors measure; outcomes use a per-step stream so that controllers
    // drawing different numbers of bits stay on common random numbers.
    std::vector<double> y(M);
    for (int m = 0; m < M; ++m) y[m] = measure(x, m, truth, sensor_rng[m]);
    RandomStream out_rng = RandomStream::derive(
        sc.seed, "outcomes", (static_cast<std::uint64_t>(replication) << 32) | static_cast<std::uint64_t>(k));
    const TransmissionOutcome outcome = draw_outcomes(S, sc.relays, cg, sc.channel.ber, out_rng);
    const ReconstructionFlags flags = reconstruct_flags(outcome, S, sc.relays);

    for (int m = 0; m < M; ++m) {
      const SchemeSpec& s = S.sensors[m].scheme;
      const int count = flags.received_count[m];
      distortion[m] = realized_distortion(s, count, source_var[m]);
      if (flags.theta[m]) {
        const double rate = s.kind == SchemeKind::Mdc
                                ? mdc_effective_rate(s.rate, s.descriptions, s.redundancy, count)
                                : s.rate;
        y_hat[m] = quantize(y[m], QuantizerSpec::for_rate(source_var[m], rate));
      } else {
        y_hat[m] = 0.0;
      }
    }

    TraceRecord rec;
    rec.k = k;
    rec.trace_prior = fs.P_prior.trace();
    rec.norm_prior = spectral_norm(fs.P_prior);
    result.norm_prior.push_back(rec.norm_prior);

    const StackedMeasurement meas = stack_measurement(flags, y_hat, distortion, design);
    kf_update(fs, meas, design, sc.joseph);
    rec.trace_post = fs.P_post.trace();
    rec.sq_error = (x.x - fs.x_hat).squaredNorm();

    for (int l = 0; l < L; ++l)
      relay_bits[l] = S.mu[l] > 0.0 ? relay_payload_for(outcome, S, sc.relays[l], l) : 0.0;
    rec.energy = step_energy(S, relay_bits, sc.energy);

    // Gateway decides S(k+1) from g(k) and P(k+1|k).
    for (int m = 0; m < M; ++m) ctx.u_prev[m] = S.sensors[m].u;
    for (int i = 0; i < lay.count(); ++i) {
      const GainBelief b = belief_for(lay.config(sc, i), gains[i][k], gains[i][k + 1], &fsmc[i]);
      if (i < M) {
        ctx.beliefs.sensor_gw[i] = b;
      } else if (i < M + L * M) {
        ctx.beliefs.sensor_relay[(i - M) / M][(i - M) % M] = b;
      } else {
        ctx.beliefs.relay_gw[i - M - L * M] = b;
      }
    }
    DecisionSet next;
    CostBreakdown cost;
    if (sc.controller_kind == ControllerKind::Predictive) {
      OptimizeResult r = optimize(fs.P_prior, ctx, sc.controller);
      next = std::move(r.decision);
      cost = r.cost;
    } else {
      std::vector<double> g_pred(M);
      for (int m = 0; m < M; ++m) g_pred[m] = ctx.beliefs.sensor_gw[m].mean();
      next = simple_logic(g_pred, ctx.u_prev, sc.controller, sc.energy, ctx.rate_sets, L);
      cost = evaluate_cost(fs.P_prior, next, ctx, sc.controller);
    }
    rec.cost_trace = cost.expected_trace;
    rec.cost_energy = cost.energy;
    rec.cost_total = cost.total;

    if (options.on_decision) {
      StepView view{k, &sc, &next, &fs.P_prior, &g_now};
      options.on_decision(view);
    }

    rec.gain_dB.resize(lay.count());
    for (int i = 0; i < lay.count(); ++i) rec.gain_dB[i] = power_to_db(lay.config(sc, i).ar.power_gain(g_now[i]));
    rec.sensors.resize(M);
    for (int m = 0; m < M; ++m) {
      const auto& d = S.sensors[m];
      auto& sr = rec.sensors[m];
      sr.u = d.u;
      sr.rate = d.scheme.rate;
      sr.coded_rate = d.scheme.coded_rate;
      sr.scheme = to_string(d.scheme.kind);
      sr.descriptions = d.scheme.descriptions;
      sr.redundancy = d.scheme.redundancy;
      sr.dominant = d.scheme.dominant;
      int rx = 0;
      for (int g : outcome.gamma[m]) rx += g;
      sr.received = rx;
      sr.theta = flags.theta[m];
      sr.received_count = flags.received_count[m];
    }
    rec.relays.resize(L);
    for (int l = 0; l < L; ++l) {
      auto& rr = rec.relays[l];
      rr.mu = S.mu[l];
      int heard = 0;
      for (int m : sc.relays[l].sensors) heard += outcome.zeta[l][m];
      rr.overheard = heard;
      rr.transmitted = relay_bits[l] > 0.0 ? 1 : 0;
      rr.gamma_tilde = outcome.gamma_tilde[l];
    }

    acc.add(rec);
    if (options.keep_trace) result.trace.push_back(std::move(rec));

    S = std::move(next);
    x = step_plant(x, truth, plant_rng);
  }
  result.metrics = acc.result();
  return result;
}

}  // namespace wsnkf
