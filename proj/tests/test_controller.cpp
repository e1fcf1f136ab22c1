#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "support.hpp"
#include "wsnkf/controller.hpp"
#include "wsnkf/error.hpp"

using namespace wsnkf;
using namespace wsnkf::testing;

namespace {

PlantModel one_sensor_plant() {
  PlantModel p = reference_plant();
  p.sensors.resize(1);
  return p;
}

double rel_close(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

ControllerConfig exhaustive(std::vector<SchemeKind> menu) {
  ControllerConfig cfg;
  cfg.search = SearchMode::Exhaustive;
  cfg.menu = std::move(menu);
  return cfg;
}

}  // namespace

TEST(Controller, ApplyIncrementExamples) {
  EXPECT_DOUBLE_EQ(apply_increment(3e-4, 3e-5, 3e-4), 3e-4);
  EXPECT_DOUBLE_EQ(apply_increment(1e-5, -3e-5, 3e-4), 0.0);
  EXPECT_NEAR(apply_increment(1e-4, 3e-5, 3e-4), 1.3e-4, 1e-18);
  EXPECT_DOUBLE_EQ(apply_increment(1e-5, -3e-5, 3e-4, 2e-5), 2e-5);
}

TEST(Controller, MdcCandidatesRespectRedundancyRange) {
  ControllerConfig cfg;
  const auto c = mdc_candidates(4.0, cfg);
  // J=2: a ∈ {1, 2}; J=3: a ∈ {1, 4/3}.
  ASSERT_EQ(c.size(), 4u);
  for (const auto& s : c) EXPECT_LE(s.redundancy, s.rate / s.descriptions + 1e-12);
  EXPECT_NEAR(c[3].redundancy, 4.0 / 3.0, 1e-12);
}

TEST(Controller, ExpectationMatchesBruteForce) {
  const PlantModel plant = reference_plant();
  RandomStream rng(101);
  for (int t = 0; t < 100; ++t) {
    const ControllerContext ctx = random_context(plant, 1, rng);
    const Matrix P = random_spd(2, rng);
    const DecisionSet S = random_decision(ctx, rng);
    const double fast = expected_posterior_trace(P, S, ctx);
    const double slow = brute_force_trace(P, S, ctx);
    EXPECT_LE(rel_close(fast, slow), 1e-12) << "t=" << t << " fast=" << fast << " slow=" << slow;
  }
}

TEST(Controller, ExpectationMatchesBruteForceTwoRelays) {
  const PlantModel plant = reference_plant();
  RandomStream rng(202);
  for (int t = 0; t < 30; ++t) {
    ControllerContext ctx = random_context(plant, 2, rng, 2);
    ctx.relays[1].sensors = {1};
    const Matrix P = random_spd(2, rng);
    const DecisionSet S = random_decision(ctx, rng);
    EXPECT_LE(rel_close(expected_posterior_trace(P, S, ctx), brute_force_trace(P, S, ctx)), 1e-12);
  }
}

TEST(Controller, ExpectationExtremes) {
  const PlantModel plant = reference_plant();
  RandomStream rng(3);
  ControllerContext ctx = random_context(plant, 0, rng);
  const Matrix P = random_spd(2, rng);
  DecisionSet S;
  S.sensors = {SensorDecision{0.0, 0.0, SchemeSpec::sdc(6)}, SensorDecision{0.0, 0.0, SchemeSpec::sdc(4)}};
  EXPECT_DOUBLE_EQ(expected_posterior_trace(P, S, ctx), P.trace());

  ctx.ber = BerModel::constant(0.0);
  S.sensors[0].u = S.sensors[1].u = 1e-4;
  const Vector R = (Vector(2) << 0.01 + sdc_distortion(ctx.source_var[0], 6),
                    0.01 + sdc_distortion(ctx.source_var[1], 4))
                       .finished();
  EXPECT_NEAR(expected_posterior_trace(P, S, ctx), textbook_posterior(P, plant.stacked_C(), R).trace(),
              1e-12 * P.trace());
}

TEST(Controller, SearchSpaceCap) {
  const PlantModel plant = reference_plant();
  RandomStream rng(4);
  const ControllerContext ctx = random_context(plant, 1, rng);
  DecisionSet S;
  S.sensors = {SensorDecision{0.0, 1e-4, SchemeSpec::mdc(6, 3, 1)},
               SensorDecision{0.0, 1e-4, SchemeSpec::mdc(6, 3, 1)}};
  S.mu = {1e-4};
  // 4 · 4 · 2 outcomes.
  EXPECT_NO_THROW(expected_posterior_trace(Matrix::Identity(2, 2), S, ctx, 32));
  EXPECT_THROW(expected_posterior_trace(Matrix::Identity(2, 2), S, ctx, 31), SearchSpaceTooLarge);
}

TEST(Controller, CostArithmetic) {
  const PlantModel plant = reference_plant();
  RandomStream rng(5);
  const ControllerContext ctx = random_context(plant, 1, rng);
  const Matrix P = random_spd(2, rng);
  const DecisionSet S = random_decision(ctx, rng);
  ControllerConfig cfg;
  cfg.energy_weight = 0.0;
  const CostBreakdown c0 = evaluate_cost(P, S, ctx, cfg);
  EXPECT_EQ(c0.total, c0.expected_trace);
  cfg.energy_weight = 1e6;
  const CostBreakdown c = evaluate_cost(P, S, ctx, cfg);
  EXPECT_EQ(c.total, c.expected_trace + 1e6 * c.energy);

  DecisionSet off = S;
  for (auto& d : off.sensors) d.u = 0.0;
  off.mu = {0.0};
  const CostBreakdown z = evaluate_cost(P, off, ctx, cfg);
  EXPECT_DOUBLE_EQ(z.total, P.trace());
  EXPECT_EQ(z.energy, 0.0);
}

TEST(Controller, RelayEnergyUsesLongestPayload) {
  const PlantModel plant = reference_plant();
  RandomStream rng(6);
  const ControllerContext ctx = random_context(plant, 1, rng);
  DecisionSet S;
  S.sensors = {SensorDecision{0.0, 1e-4, SchemeSpec::sdc(3)}, SensorDecision{0.0, 2e-4, SchemeSpec::sdc(5)}};
  S.mu = {1e-4};
  EXPECT_NEAR(expected_energy(S, ctx), (3 * 1e-4 + 5 * 2e-4 + 5 * 1e-4) / 1e8, 1e-25);
}

TEST(Controller, SingleSensorArgminEqualsBruteForce) {
  const PlantModel plant = one_sensor_plant();
  RandomStream rng(7);
  for (int t = 0; t < 50; ++t) {
    const ControllerContext ctx = random_context(plant, 0, rng);
    const Matrix P = random_spd(2, rng);
    ControllerConfig cfg;
    cfg.energy_weight = std::pow(10.0, uniform(rng, 7.0, 11.0));
    const OptimizeResult r = optimize(P, ctx, cfg);
    EXPECT_EQ(r.candidates, 12u);

    double best = std::numeric_limits<double>::infinity();
    for (double du : cfg.increments)
      for (double b : ctx.rate_sets[0]) {
        DecisionSet S;
        S.sensors = {SensorDecision{du, apply_increment(ctx.u_prev[0], du, 3e-4), SchemeSpec::sdc(b)}};
        best = std::min(best, evaluate_cost(P, S, ctx, cfg).total);
      }
    EXPECT_LE(rel_close(r.cost.total, best), 1e-12);
  }
}

TEST(Controller, ExhaustiveSdcWithRelayEqualsBruteForce) {
  const PlantModel plant = reference_plant();
  RandomStream rng(8);
  for (int t = 0; t < 20; ++t) {
    const ControllerContext ctx = random_context(plant, 1, rng);
    const Matrix P = random_spd(2, rng);
    ControllerConfig cfg = exhaustive({SchemeKind::Sdc});
    cfg.energy_weight = std::pow(10.0, uniform(rng, 7.0, 11.0));
    const OptimizeResult r = optimize(P, ctx, cfg);
    check_decision(r.decision, ctx.energy, ctx.rate_sets);

    double best = std::numeric_limits<double>::infinity();
    for (double du0 : cfg.increments)
      for (double b0 : ctx.rate_sets[0])
        for (double du1 : cfg.increments)
          for (double b1 : ctx.rate_sets[1])
            for (double mu : {0.0, 1e-4}) {
              DecisionSet S;
              S.sensors = {SensorDecision{du0, apply_increment(ctx.u_prev[0], du0, 3e-4), SchemeSpec::sdc(b0)},
                           SensorDecision{du1, apply_increment(ctx.u_prev[1], du1, 3e-4), SchemeSpec::sdc(b1)}};
              S.mu = {mu};
              best = std::min(best, evaluate_cost(P, S, ctx, cfg).total);
            }
    EXPECT_LE(rel_close(r.cost.total, best), 1e-12);
    // The reported cost is the cost of the returned decision.
    EXPECT_LE(rel_close(evaluate_cost(P, r.decision, ctx, cfg).total, r.cost.total), 1e-12);
  }
}

TEST(Controller, PerfectChannelWithLargeWeightPicksLeastEnergy) {
  const PlantModel plant = reference_plant();
  RandomStream rng(9);
  ControllerContext ctx = random_context(plant, 0, rng);
  ctx.ber = BerModel::constant(0.0);
  ctx.u_prev = {1.5e-4, 1.5e-4};
  ControllerConfig cfg;
  cfg.energy_weight = 1e15;
  const OptimizeResult r = optimize(random_spd(2, rng), ctx, cfg);
  for (const auto& d : r.decision.sensors) {
    EXPECT_DOUBLE_EQ(d.du, -3e-5);
    EXPECT_DOUBLE_EQ(d.scheme.rate, 3.0);
  }
}

TEST(Controller, LargerMenuNeverCostsMore) {
  const PlantModel plant = reference_plant();
  RandomStream rng(10);
  for (int t = 0; t < 100; ++t) {
    const ControllerContext ctx = random_context(plant, 0, rng);
    const Matrix P = random_spd(2, rng);
    const double w = std::pow(10.0, uniform(rng, 8.0, 11.0));
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& menu : {std::vector{SchemeKind::Sdc}, std::vector{SchemeKind::Sdc, SchemeKind::Zec},
                             std::vector{SchemeKind::Sdc, SchemeKind::Zec, SchemeKind::Mdc}}) {
      ControllerConfig cfg = exhaustive(menu);
      cfg.energy_weight = w;
      const OptimizeResult r = optimize(P, ctx, cfg);
      EXPECT_LE(r.cost.total, prev * (1.0 + 1e-12));
      prev = r.cost.total;

      ControllerConfig two = cfg;
      two.search = SearchMode::TwoStage;
      EXPECT_GE(optimize(P, ctx, two).cost.total, r.cost.total * (1.0 - 1e-12));
    }
  }
}

TEST(Controller, WeightTradesEnergyForTrace) {
  const PlantModel plant = reference_plant();
  RandomStream rng(11);
  for (int t = 0; t < 20; ++t) {
    const ControllerContext ctx = random_context(plant, 1, rng);
    const Matrix P = random_spd(2, rng);
    double prev_e = std::numeric_limits<double>::infinity(), prev_t = 0.0;
    for (double w = 1e6; w <= 1e13; w *= 3.0) {
      ControllerConfig cfg = exhaustive({SchemeKind::Sdc, SchemeKind::Zec, SchemeKind::Mdc});
      cfg.energy_weight = w;
      const OptimizeResult r = optimize(P, ctx, cfg);
      EXPECT_LE(r.cost.energy, prev_e * (1.0 + 1e-9) + 1e-30);
      EXPECT_GE(r.cost.expected_trace, prev_t * (1.0 - 1e-9));
      prev_e = r.cost.energy;
      prev_t = r.cost.expected_trace;
    }
  }
}

TEST(Controller, DecisionsSatisfyConstraints) {
  const PlantModel plant = reference_plant();
  RandomStream rng(12);
  for (int t = 0; t < 30; ++t) {
    ControllerContext ctx = random_context(plant, 1, rng);
    ctx.u_prev[0] = 2.9e-4;
    ctx.u_prev[1] = 1e-5;
    ControllerConfig cfg;
    cfg.menu = {SchemeKind::Sdc, SchemeKind::Zec, SchemeKind::Mdc};
    const OptimizeResult r = optimize(random_spd(2, rng), ctx, cfg);
    EXPECT_NO_THROW(check_decision(r.decision, ctx.energy, ctx.rate_sets));
    for (const auto& d : r.decision.sensors) {
      EXPECT_GE(d.u, 0.0);
      EXPECT_LE(d.u, 3e-4);
    }
  }
}

TEST(Controller, ConfigValidation) {
  ControllerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.increments.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ControllerConfig{};
  cfg.menu = {SchemeKind::Mdc};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ControllerConfig{};
  cfg.energy_weight = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Controller, SimpleLogicExamples) {
  ControllerConfig cfg;
  EnergyParams e{1e8, 0.0, {3e-4}, {}};
  const std::vector<std::vector<double>> rates{{3, 4, 5, 6, 7, 8}};

  // -105 dB at 1e-4 W gives 3.2e-15 > T_u: step down, 8 bits.
  DecisionSet S = simple_logic({db_to_power(-105.0)}, {1e-4}, cfg, e, rates, 0);
  EXPECT_NEAR(S.sensors[0].u, 7e-5, 1e-18);
  EXPECT_DOUBLE_EQ(S.sensors[0].scheme.rate, 8.0);
  EXPECT_EQ(S.sensors[0].scheme.kind, SchemeKind::Sdc);

  S = simple_logic({db_to_power(-125.0)}, {1e-4}, cfg, e, rates, 0);
  EXPECT_DOUBLE_EQ(S.sensors[0].scheme.rate, 4.0);
  EXPECT_NEAR(S.sensors[0].u, 1.3e-4, 1e-18);

  S = simple_logic({db_to_power(-135.0)}, {1e-4}, cfg, e, rates, 2);
  EXPECT_DOUBLE_EQ(S.sensors[0].scheme.rate, 3.0);
  EXPECT_EQ(S.mu, std::vector<double>(2, 0.0));

  S = simple_logic({db_to_power(-115.0)}, {1e-4}, cfg, e, rates, 0);
  EXPECT_DOUBLE_EQ(S.sensors[0].scheme.rate, 6.0);

  // At the cap an increase keeps the previous power.
  S = simple_logic({db_to_power(-130.0)}, {2.9e-4}, cfg, e, rates, 0);
  EXPECT_DOUBLE_EQ(S.sensors[0].u, 2.9e-4);
  // Near zero a decrease keeps the previous power.
  S = simple_logic({db_to_power(-90.0)}, {1e-5}, cfg, e, rates, 0);
  EXPECT_DOUBLE_EQ(S.sensors[0].u, 1e-5);
}
