#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"
#include "wsnkf/error.hpp"
#include "wsnkf/experiments.hpp"
#include "wsnkf/scenario.hpp"
#include "wsnkf/simulation.hpp"
#include "wsnkf/trace_io.hpp"

using namespace wsnkf;
using nlohmann::json;

namespace {

json base_doc() {
  return json::parse(R"({
    "schema": 1,
    "name": "unit",
    "horizon": 300,
    "seed": 77,
    "plant": {
      "A": [[1.6718, -0.9948], [1.0, 0.0]],
      "Q": [[0.5, 0.0], [0.0, 0.5]],
      "P0": [[0.3, 0.0], [0.0, 0.3]],
      "sensors": [
        {"C": [1.0, 0.0], "R": 0.01, "rates": [3, 4, 5, 6]},
        {"C": [0.0, 1.0], "R": 0.01, "rates": [3, 4, 5, 6]}
      ]
    },
    "channel": {
      "ber": {"kind": "exponential", "N0": 2.5e-16},
      "sensor_gw": {"a": 0.99, "mean_power_dB": -105.0, "prediction": "predicted"},
      "sensor_relay": {"a": 0.99, "mean_power_dB": -95.0, "prediction": "predicted"},
      "relay_gw": {"a": 0.99, "mean_power_dB": -95.0, "prediction": "predicted"}
    },
    "relays": [{"mu_max": 1e-4}],
    "energy": {"r": 1e8, "E_P": 0.0, "u_max": 3e-4, "u_init": 1.5e-4},
    "controller": {"kind": "predictive", "energy_weight": 1e9,
                   "menu": ["SDC", "ZEC", "MDC"], "relay_mode": "on_off"}
  })");
}

Scenario base() { return scenario_from_json(base_doc()); }

std::string trace_bytes(const Scenario& sc) {
  std::ostringstream os;
  const RunResult r = run_scenario(sc);
  write_trace(os, r.trace);
  return os.str();
}

// Constant-BER scenario where every packet of b bits succeeds with
// probability (1 - beta)^b regardless of the channel.
Scenario constant_ber(double beta, std::vector<double> rates) {
  json d = base_doc();
  d.erase("relays");
  d["channel"].erase("sensor_relay");
  d["channel"].erase("relay_gw");
  d["channel"]["ber"] = {{"kind", "constant"}, {"value", beta}};
  d["plant"]["sensors"][0]["rates"] = rates;
  d["plant"]["sensors"][1]["rates"] = rates;
  d["controller"] = {{"kind", "predictive"}, {"menu", {"SDC"}}, {"u_min", 3e-5}};
  d["horizon"] = 200;
  return scenario_from_json(d);
}

std::string expect_config_error(const json& d) {
  try {
    scenario_from_json(d);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for " << d.dump();
  return "";
}

}  // namespace

TEST(Harness, SameSeedGivesIdenticalTraceBytes) {
  const Scenario sc = base();
  EXPECT_EQ(trace_bytes(sc), trace_bytes(sc));
}

TEST(Harness, DifferentSeedChangesTrace) {
  Scenario a = base(), b = base();
  b.seed = 78;
  EXPECT_NE(trace_bytes(a), trace_bytes(b));
}

TEST(Harness, TraceRoundTrip) {
  const RunResult r = run_scenario(base());
  std::stringstream ss;
  write_trace(ss, r.trace);
  const auto back = parse_trace(ss);
  ASSERT_EQ(back.size(), r.trace.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i], r.trace[i]) << "row " << i;
}

TEST(Harness, TraceSchemaMismatchRejected) {
  std::stringstream ss("# trace-schema: 99\nk\n");
  EXPECT_THROW(parse_trace(ss), ConfigError);
  std::stringstream none("k,trace_prior\n");
  EXPECT_THROW(parse_trace(none), ConfigError);
}

TEST(Harness, OneStepWithoutPower) {
  json d = base_doc();
  d["horizon"] = 1;
  d["energy"]["u_init"] = 0.0;
  const Scenario sc = scenario_from_json(d);
  const RunResult r = run_scenario(sc);
  EXPECT_EQ(r.metrics.E_total, 0.0);
  EXPECT_DOUBLE_EQ(r.metrics.phi, 0.6);
  EXPECT_DOUBLE_EQ(r.trace[0].trace_prior, 0.6);
}

TEST(Harness, RecordsAreConsistent) {
  const RunResult r = run_scenario(base());
  ASSERT_EQ(r.trace.size(), 300u);
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    const auto& rec = r.trace[k];
    EXPECT_EQ(rec.k, static_cast<std::int64_t>(k));
    EXPECT_LE(rec.trace_post, rec.trace_prior + 1e-12);
    for (const auto& s : rec.sensors) {
      EXPECT_GE(s.u, 0.0);
      EXPECT_LE(s.u, 3e-4 * (1 + 1e-12));
      EXPECT_LE(s.theta, 1);
    }
    EXPECT_NEAR(rec.cost_total, rec.cost_trace + 1e9 * rec.cost_energy, 1e-12 * rec.cost_total);
  }
}

TEST(Harness, ConfigErrorsNameTheField) {
  json d = base_doc();
  d["plant"]["bogus"] = 1;
  EXPECT_NE(expect_config_error(d).find("bogus"), std::string::npos);

  d = base_doc();
  d["channel"]["sensor_gw"]["a"] = 1.0;
  EXPECT_NE(expect_config_error(d).find("a"), std::string::npos);

  d = base_doc();
  d["schema"] = 7;
  expect_config_error(d);

  d = base_doc();
  d["controller"]["menu"] = {"XYZ"};
  expect_config_error(d);

  d = base_doc();
  d["plant"]["Q"] = {{1.0, 2.0}, {0.0, 1.0}};
  expect_config_error(d);

  d = base_doc();
  d.erase("plant");
  expect_config_error(d);

  d = base_doc();
  d["horizon"] = 0;
  expect_config_error(d);
}

TEST(Harness, CanonicalDocumentRoundTrips) {
  const Scenario sc = base();
  const json doc = scenario_to_json(sc);
  const Scenario back = scenario_from_json(doc);
  EXPECT_EQ(scenario_to_json(back), doc);
  EXPECT_EQ(config_hash(back), config_hash(sc));
  EXPECT_EQ(config_hash(sc).size(), 16u);
  Scenario other = sc;
  other.controller.energy_weight *= 2;
  EXPECT_NE(config_hash(other), config_hash(sc));
}

TEST(Harness, CompareAgainstItselfIsZero) {
  Scenario sc = base();
  sc.horizon = 100;
  const auto rows = compare_controllers({{"a", sc}, {"b", sc}});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].energy_change, 0.0);
  EXPECT_EQ(rows[1].phi_change, 0.0);
  EXPECT_EQ(rows[1].D_change, 0.0);
  EXPECT_EQ(rows[1].V_change, 0.0);
}

TEST(Harness, SinglePointSweepEqualsRun) {
  Scenario sc = base();
  sc.horizon = 150;
  const auto s = sweep(sc, SweepParam::EnergyWeight, {3e9});
  Scenario direct = sc;
  direct.controller.energy_weight = 3e9;
  const RunMetrics m = run_scenario(direct).metrics;
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].second.V_bar, m.V_bar);
  EXPECT_EQ(s[0].second.E_total, m.E_total);
}

TEST(Harness, EnergyFallsAsWeightGrows) {
  Scenario sc = base();
  sc.horizon = 2000;
  sc.relays.clear();
  sc.channel.sensor_relay.clear();
  sc.channel.relay_gw.clear();
  sc.energy.mu_max.clear();
  sc.controller.menu = {SchemeKind::Sdc};
  const auto s = sweep(sc, SweepParam::EnergyWeight, {1e8, 1e9, 1e10, 1e11});
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(s[i].second.E_total, s[i - 1].second.E_total);
}

TEST(Harness, MatchEnergyHitsTarget) {
  Scenario sc = base();
  sc.horizon = 500;
  const RunMetrics ref = run_scenario(sc).metrics;
  Scenario off = sc;
  off.controller.relay_mode = RelayMode::Off;
  const EnergyMatch m = match_energy(off, ref.E_total, 1e7, 1e12);
  ASSERT_TRUE(m.matched);
  EXPECT_NEAR(m.metrics.E_total, ref.E_total, 0.01 * ref.E_total);
}

TEST(Harness, NuEstimateExtremes) {
  EXPECT_EQ(estimate_nu(constant_ber(0.0, {3, 4}), 20).max, 0.0);
  EXPECT_EQ(estimate_nu(constant_ber(1.0, {3, 4}), 20).mean, 1.0);
}

TEST(Harness, NuEstimateMatchesClosedForm) {
  // One 4-bit rate: per-packet success 0.99, both packets needed.
  const double beta = 1.0 - std::pow(0.99, 0.25);
  const NuEstimate est = estimate_nu(constant_ber(beta, {4}), 100);
  const double nu = 1.0 - 0.99 * 0.99;
  EXPECT_NEAR(nu, 0.0199, 1e-12);
  const double sigma = std::sqrt(nu * (1.0 - nu) / static_cast<double>(est.samples));
  EXPECT_NEAR(est.mean, nu, 3.0 * sigma);
}

TEST(Harness, MdcCurvesDecreaseWithGain) {
  std::vector<double> g;
  for (double x = -125.0; x <= -90.0; x += 0.5) g.push_back(x);
  const MdcCurve c = mdc_curve(9.0, 5e-5, BerModel::exponential(), g);
  ASSERT_EQ(c.labels.size(), 3u);
  for (const auto& curve : c.distortion)
    for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i], curve[i - 1] + 1e-15);
}

TEST(Harness, FsmcBuiltPerLink) {
  json d = base_doc();
  d["channel"]["sensor_gw"]["prediction"] = "fsmc";
  const Scenario sc = scenario_from_json(d);
  const auto models = build_link_fsmc(sc, 0);
  ASSERT_EQ(models.size(), 5u);
  EXPECT_EQ(models[0].size(), 12);
  EXPECT_EQ(models[1].size(), 12);
  EXPECT_EQ(models[2].size(), 0);  // sensor-relay links keep point predictions
  EXPECT_NO_THROW(run_scenario(sc));
}

#ifdef WSNKF_CLI
TEST(Harness, CliExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "wsnkf_cli_test";
  std::filesystem::create_directories(dir);
  json d = base_doc();
  d["horizon"] = 20;
  std::ofstream(dir / "ok.json") << d.dump();
  d["plant"]["bogus"] = 1;
  std::ofstream(dir / "bad.json") << d.dump();
  const std::string cli = WSNKF_CLI;
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(run("simulate " + (dir / "ok.json").string() + " --out " + (dir / "out").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "trace_rep0.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "summary.json"));
  EXPECT_EQ(run("simulate " + (dir / "bad.json").string() + " --out " + (dir / "out").string()), 2);
  EXPECT_EQ(run("simulate " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run("mdc-curve --rate 9 --power 5e-5 --out " + (dir / "curve").string()), 0);
}
#endif
