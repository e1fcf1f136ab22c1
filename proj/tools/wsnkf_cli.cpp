// Command-line front end: simulate, compare, sweep, bound, mdc-curve, fsmc.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsnkf/error.hpp"
#include "wsnkf/experiments.hpp"
#include "wsnkf/scenario.hpp"
#include "wsnkf/simulation.hpp"
#include "wsnkf/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wsnkf;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<std::int64_t> horizon;
  std::string out = "out";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Master seed (overrides the scenario)");
  app->add_option("--replications", c.replications, "Replication count (overrides the scenario)");
  app->add_option("--horizon", c.horizon, "Steps per run (overrides the scenario)");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
}

Scenario load(const std::string& path, const Common& c) {
  Scenario sc = load_scenario(path);
  if (c.seed) sc.seed = *c.seed;
  if (c.replications) sc.replications = *c.replications;
  if (c.horizon) sc.horizon = *c.horizon;
  sc.validate();
  return sc;
}

fs::path out_dir(const Common& c) {
  fs::path p(c.out);
  fs::create_directories(p);
  return p;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json summary_header(const Scenario& sc, const std::string& command) {
  return json{{"schema", 1},
              {"command", command},
              {"scenario", sc.name},
              {"config_hash", config_hash(sc)},
              {"seed", sc.seed},
              {"replications", sc.replications},
              {"horizon", sc.horizon}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<std::string> link_names(const Scenario& sc) {
  const LinkLayout lay{sc.sensor_count(), sc.relay_count()};
  std::vector<std::string> names;
  for (int i = 0; i < lay.count(); ++i) names.push_back(lay.name(i));
  return names;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ConfigError("empty numeric list");
  return out;
}

std::string metrics_csv_header() { return "V_bar,phi,D_emp,E_total,relay_efficiency"; }

std::string metrics_csv(const RunMetrics& m) {
  return fmt(m.V_bar) + "," + fmt(m.phi) + "," + fmt(m.D_emp) + "," + fmt(m.E_total) + "," +
         (m.relay_efficiency ? fmt(*m.relay_efficiency) : std::string());
}

int cmd_simulate(const std::string& path, const Common& c) {
  const Scenario sc = load(path, c);
  const fs::path dir = out_dir(c);
  json runs = json::array();
  std::vector<RunMetrics> all;
  for (int rep = 0; rep < sc.replications; ++rep) {
    const RunResult r = run_scenario(sc, rep);
    write_trace_file(dir / ("trace_rep" + std::to_string(rep) + ".csv"), r.trace, link_names(sc));
    runs.push_back(metrics_to_json(r.metrics));
    all.push_back(r.metrics);
  }
  json summary = summary_header(sc, "simulate");
  summary["runs"] = runs;
  summary["metrics"] = metrics_to_json(mean_metrics(all));
  write_json(dir / "summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_compare(const std::string& path, const std::vector<std::string>& menus, bool simple, const Common& c) {
  const Scenario base = load(path, c);
  std::vector<std::pair<std::string, Scenario>> variants;
  if (simple) {
    Scenario s = base;
    s.controller_kind = ControllerKind::SimpleLogic;
    variants.emplace_back("simple_logic", s);
  }
  for (const auto& menu : menus) {
    Scenario s = base;
    s.controller_kind = ControllerKind::Predictive;
    s.controller.menu.clear();
    std::stringstream ss(menu);
    std::string item;
    while (std::getline(ss, item, ',')) s.controller.menu.push_back(scheme_kind_from_string(item));
    s.validate();
    variants.emplace_back(menu, s);
  }
  if (variants.empty()) variants.emplace_back("scenario", base);
  const auto rows = compare_controllers(variants);
  const fs::path dir = out_dir(c);
  std::ofstream csv(dir / "compare.csv");
  csv << "label," << metrics_csv_header() << ",energy_change,phi_change,D_change,V_change\n";
  json table = json::array();
  for (const auto& r : rows) {
    csv << '"' << r.label << "\"," << metrics_csv(r.metrics) << "," << fmt(r.energy_change) << ","
        << fmt(r.phi_change) << "," << fmt(r.D_change) << "," << fmt(r.V_change) << "\n";
    table.push_back({{"label", r.label},
                     {"metrics", metrics_to_json(r.metrics)},
                     {"energy_change", r.energy_change},
                     {"phi_change", r.phi_change},
                     {"D_change", r.D_change},
                     {"V_change", r.V_change}});
  }
  json summary = summary_header(base, "compare");
  summary["rows"] = table;
  write_json(dir / "summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& param, const std::string& grid, const Common& c) {
  const Scenario sc = load(path, c);
  const SweepParam p = sweep_param_from_string(param);
  const auto rows = sweep(sc, p, parse_list(grid));
  const fs::path dir = out_dir(c);
  std::ofstream csv(dir / "sweep.csv");
  csv << to_string(p) << "," << metrics_csv_header() << "\n";
  json table = json::array();
  for (const auto& [v, m] : rows) {
    csv << fmt(v) << "," << metrics_csv(m) << "\n";
    table.push_back({{"value", v}, {"metrics", metrics_to_json(m)}});
  }
  json summary = summary_header(sc, "sweep");
  summary["parameter"] = to_string(p);
  summary["rows"] = table;
  write_json(dir / "summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_bound(const std::string& path, int k_max, std::size_t nu_draws, const Common& c) {
  const Scenario sc = load(path, c);
  const int reps = c.replications.value_or(sc.replications);
  const BoundReport rep = verify_bound(sc, reps, k_max);
  const fs::path dir = out_dir(c);
  std::ofstream csv(dir / "bound.csv");
  csv << "k,bound,mean_norm,pass\n";
  for (std::size_t k = 0; k < rep.bound.size(); ++k)
    csv << k << "," << fmt(rep.bound[k]) << "," << fmt(rep.mean_norm[k]) << ","
        << (rep.mean_norm[k] <= rep.bound[k] ? 1 : 0) << "\n";
  json summary = summary_header(sc, "bound");
  json report = bound_report_to_json(rep);
  report.erase("curve");
  summary["bound"] = report;
  if (nu_draws > 0) {
    const NuEstimate nu = estimate_nu(sc, nu_draws);
    summary["nu_estimate"] = {{"max", nu.max}, {"mean", nu.mean}, {"samples", nu.samples},
                              {"states", nu.per_state.size()}};
  }
  write_json(dir / "bound.json", summary);
  std::cout << summary.dump(2) << "\n";
  return rep.all_pass ? 0 : 1;
}

int cmd_mdc_curve(double rate, double power, double from, double to, double step, double n0,
                  const std::string& out) {
  if (!(step > 0.0) || !(to > from)) throw ConfigError("mdc-curve: need from < to and step > 0");
  std::vector<double> grid;
  for (double g = from; g <= to + 1e-9; g += step) grid.push_back(g);
  const MdcCurve c = mdc_curve(rate, power, BerModel::exponential(n0), grid);
  std::ostringstream csv;
  csv << "gain_dB";
  for (const auto& l : c.labels) csv << "," << l;
  csv << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv << fmt(grid[i]);
    for (const auto& d : c.distortion) csv << "," << fmt(d[i]);
    csv << "\n";
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    fs::create_directories(fs::path(out));
    std::ofstream(fs::path(out) / "mdc_curve.csv") << csv.str();
    for (const auto& [g, ft] : curve_crossovers(c))
      std::cout << "crossover at " << g << " dB: " << ft.first << " -> " << ft.second << "\n";
  }
  return 0;
}

int cmd_fsmc(const std::string& path, int states, const std::string& link, const Common& c) {
  Scenario sc = load(path, c);
  sc.channel.fsmc_states = states;
  const auto models = build_link_fsmc(sc, 0, true);
  const LinkLayout lay{sc.sensor_count(), sc.relay_count()};
  json out = summary_header(sc, "fsmc");
  json links = json::object();
  for (int i = 0; i < lay.count(); ++i) {
    if (!link.empty() && lay.name(i) != link) continue;
    links[lay.name(i)] = fsmc_to_json(models[i]);
  }
  if (links.empty()) throw ConfigError("fsmc: unknown link '" + link + "'");
  out["links"] = links;
  const fs::path dir = out_dir(c);
  write_json(dir / "fsmc.json", out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive power and coding control for Kalman filtering over fading sensor links"};
  app.require_subcommand(1);

  Common common;
  std::string scenario;

  auto* sim = app.add_subcommand("simulate", "Run the closed loop and write traces and a summary");
  sim->add_option("scenario", scenario, "Scenario JSON file")->required();
  add_common(sim, common);

  std::vector<std::string> menus;
  bool with_simple = false;
  auto* cmp = app.add_subcommand("compare", "Compare coding menus and the simple-logic baseline");
  cmp->add_option("scenario", scenario, "Scenario JSON file")->required();
  cmp->add_option("--menus", menus, "Menus such as SDC SDC,ZEC SDC,ZEC,MDC");
  cmp->add_flag("--simple-logic", with_simple, "Add the simple-logic baseline as the reference row");
  add_common(cmp, common);

  std::string param = "energy_weight", grid;
  auto* swp = app.add_subcommand("sweep", "Sweep one parameter over a grid");
  swp->add_option("scenario", scenario, "Scenario JSON file")->required();
  swp->add_option("--param", param, "energy_weight, u_max, increment or mu_max")->capture_default_str();
  swp->add_option("--grid", grid, "Comma-separated values")->required();
  add_common(swp, common);

  int k_max = 200;
  std::size_t nu_draws = 0;
  auto* bnd = app.add_subcommand("bound", "Monte-Carlo check of the covariance bound");
  bnd->add_option("scenario", scenario, "Scenario JSON file")->required();
  bnd->add_option("--kmax", k_max, "Last step checked")->capture_default_str();
  bnd->add_option("--nu-draws", nu_draws, "Also estimate nu with this many draws per visited state");
  add_common(bnd, common);

  double rate = 9.0, power = 5e-5, from = -125.0, to = -90.0, step = 0.25, n0 = 2.5e-16;
  std::string curve_out;
  auto* mdc = app.add_subcommand("mdc-curve", "Expected distortion of SDC and MDC against channel gain");
  mdc->add_option("--rate", rate, "Total bits per sample")->capture_default_str();
  mdc->add_option("--power", power, "Transmit power in W")->capture_default_str();
  mdc->add_option("--from", from, "First gain in dB")->capture_default_str();
  mdc->add_option("--to", to, "Last gain in dB")->capture_default_str();
  mdc->add_option("--step", step, "Gain step in dB")->capture_default_str();
  mdc->add_option("--n0", n0, "Noise level of the BER model")->capture_default_str();
  mdc->add_option("--out", curve_out, "Output directory (stdout if omitted)");

  int states = 12;
  std::string link;
  auto* fsm = app.add_subcommand("fsmc", "Estimate finite-state Markov channel models");
  fsm->add_option("scenario", scenario, "Scenario JSON file")->required();
  fsm->add_option("--states", states, "Number of states")->capture_default_str();
  fsm->add_option("--link", link, "Only this link (e.g. s0_gw)");
  add_common(fsm, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(scenario, common);
    if (*cmp) return cmd_compare(scenario, menus, with_simple, common);
    if (*swp) return cmd_sweep(scenario, param, grid, common);
    if (*bnd) return cmd_bound(scenario, k_max, nu_draws, common);
    if (*mdc) return cmd_mdc_curve(rate, power, from, to, step, n0, curve_out);
    if (*fsm) return cmd_fsmc(scenario, states, link, common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
