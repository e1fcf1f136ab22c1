#include "wsnkf/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "wsnkf/error.hpp"
#include "wsnkf/random.hpp"

namespace wsnkf {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "." + key + " is required");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

Matrix to_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + " must be a non-empty array of rows");
  const auto rows = j.size();
  const auto cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(where + " rows must be non-empty arrays");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(where + " rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ConfigError(where + " entries must be numbers");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

json from_matrix(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

std::vector<double> number_or_array(const json& j, std::size_t n, const std::string& where) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  if (!j.is_array() || j.size() != n)
    throw ConfigError(where + " must be a number or an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + " entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

SensorSpec parse_sensor(const json& j, const std::string& where) {
  check_keys(j, {"C", "R", "rates", "variance"}, where);
  SensorSpec s;
  const auto c = get<std::vector<double>>(j, "C", where);
  s.C = Eigen::Map<const RowVector>(c.data(), static_cast<Eigen::Index>(c.size()));
  s.R = get<double>(j, "R", where);
  s.rate_set = get<std::vector<double>>(j, "rates", where);
  if (j.contains("variance")) s.variance = get<double>(j, "variance", where);
  return s;
}

PlantModel parse_plant(const json& j, const std::string& where, const PlantModel* base) {
  check_keys(j, {"A", "Q", "P0", "sensors"}, where);
  PlantModel p = base ? *base : PlantModel{};
  if (j.contains("A")) p.A = to_matrix(j["A"], where + ".A");
  else if (!base) throw ConfigError(where + ".A is required");
  if (j.contains("Q")) p.Q = to_matrix(j["Q"], where + ".Q");
  else if (!base) throw ConfigError(where + ".Q is required");
  if (j.contains("P0")) p.P0 = to_matrix(j["P0"], where + ".P0");
  else if (!base) throw ConfigError(where + ".P0 is required");
  if (j.contains("sensors")) {
    if (!j["sensors"].is_array()) throw ConfigError(where + ".sensors must be an array");
    p.sensors.clear();
    for (std::size_t m = 0; m < j["sensors"].size(); ++m)
      p.sensors.push_back(parse_sensor(j["sensors"][m], where + ".sensors[" + std::to_string(m) + "]"));
  } else if (!base) {
    throw ConfigError(where + ".sensors is required");
  }
  return p;
}

json plant_to_json(const PlantModel& p) {
  json sensors = json::array();
  for (const auto& s : p.sensors) {
    json js;
    js["C"] = std::vector<double>(s.C.data(), s.C.data() + s.C.size());
    js["R"] = s.R;
    js["rates"] = s.rate_set;
    if (s.variance) js["variance"] = *s.variance;
    sensors.push_back(js);
  }
  return json{{"A", from_matrix(p.A)}, {"Q", from_matrix(p.Q)}, {"P0", from_matrix(p.P0)}, {"sensors", sensors}};
}

PredictionMode parse_mode(const std::string& s, const std::string& where) {
  if (s == "known") return PredictionMode::Known;
  if (s == "predicted") return PredictionMode::Predicted;
  if (s == "fixed") return PredictionMode::Fixed;
  if (s == "fsmc") return PredictionMode::Fsmc;
  throw ConfigError(where + ": unknown prediction mode '" + s + "' (known, predicted, fixed, fsmc)");
}

LinkConfig parse_link(const json& j, const std::string& where) {
  check_keys(j, {"a", "mean_power_dB", "noise_var", "prediction", "fixed_dB"}, where);
  LinkConfig lc;
  const double a = get_or<double>(j, "a", 0.999, where);
  const double db = get<double>(j, "mean_power_dB", where);
  lc.ar = ArLinkModel::calibrated(a, db);
  if (j.contains("noise_var")) lc.ar.noise_var = get<double>(j, "noise_var", where);
  lc.prediction.mode = parse_mode(get_or<std::string>(j, "prediction", "predicted", where), where + ".prediction");
  lc.prediction.fixed_dB = get_or<double>(j, "fixed_dB", -110.0, where);
  try {
    lc.ar.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return lc;
}

json link_to_json(const LinkConfig& lc) {
  return json{{"a", lc.ar.a},
              {"mean_power_dB", lc.ar.mean_power_dB},
              {"noise_var", lc.ar.noise_var},
              {"prediction", to_string(lc.prediction.mode)},
              {"fixed_dB", lc.prediction.fixed_dB}};
}

// A single link object applies to every entry.
std::vector<LinkConfig> parse_links(const json& j, std::size_t n, const std::string& where) {
  std::vector<LinkConfig> out;
  if (j.is_object()) {
    out.assign(n, parse_link(j, where));
  } else if (j.is_array() && j.size() == n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(parse_link(j[i], where + "[" + std::to_string(i) + "]"));
  } else {
    throw ConfigError(where + " must be a link object or an array of " + std::to_string(n));
  }
  return out;
}

BerModel parse_ber(const json& j, const std::string& where) {
  check_keys(j, {"kind", "value", "N0"}, where);
  const auto kind = get_or<std::string>(j, "kind", "exponential", where);
  BerModel b;
  if (kind == "constant") b = BerModel::constant(get<double>(j, "value", where));
  else if (kind == "exponential") b = BerModel::exponential(get_or<double>(j, "N0", 2.5e-16, where));
  else if (kind == "q_function") b = BerModel::q_function(get_or<double>(j, "N0", 2.5e-16, where));
  else throw ConfigError(where + ".kind: unknown BER model '" + kind + "'");
  try {
    b.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return b;
}

json ber_to_json(const BerModel& b) {
  switch (b.kind) {
    case BerModel::Kind::Constant: return json{{"kind", "constant"}, {"value", b.value}};
    case BerModel::Kind::Exponential: return json{{"kind", "exponential"}, {"N0", b.value}};
    case BerModel::Kind::QFunction: return json{{"kind", "q_function"}, {"N0", b.value}};
  }
  return {};
}

const char* search_name(SearchMode s) { return s == SearchMode::TwoStage ? "two_stage" : "exhaustive"; }

const char* relay_mode_name(RelayMode r) {
  switch (r) {
    case RelayMode::OnOff: return "on_off";
    case RelayMode::AlwaysOn: return "always_on";
    case RelayMode::Off: return "off";
  }
  return "?";
}

void parse_controller(const json& j, Scenario& sc, const std::string& where) {
  check_keys(j,
             {"kind", "energy_weight", "increments", "search", "menu", "mdc_descriptions", "mdc_redundancy",
              "mdc_full_redundancy", "relay_mode", "outcome_cap", "u_min", "threshold", "bit_table",
              "bit_floor", "joseph"},
             where);
  ControllerConfig& c = sc.controller;
  const auto kind = get_or<std::string>(j, "kind", "predictive", where);
  if (kind == "predictive") sc.controller_kind = ControllerKind::Predictive;
  else if (kind == "simple_logic") sc.controller_kind = ControllerKind::SimpleLogic;
  else throw ConfigError(where + ".kind: unknown controller '" + kind + "' (predictive, simple_logic)");
  c.energy_weight = get_or<double>(j, "energy_weight", c.energy_weight, where);
  c.increments = get_or<std::vector<double>>(j, "increments", c.increments, where);
  const auto search = get_or<std::string>(j, "search", "two_stage", where);
  if (search == "two_stage") c.search = SearchMode::TwoStage;
  else if (search == "exhaustive") c.search = SearchMode::Exhaustive;
  else throw ConfigError(where + ".search: unknown mode '" + search + "'");
  if (j.contains("menu")) {
    c.menu.clear();
    for (const auto& s : get<std::vector<std::string>>(j, "menu", where)) {
      try {
        c.menu.push_back(scheme_kind_from_string(s));
      } catch (const ConfigError& e) {
        throw ConfigError(where + ".menu: " + e.what());
      }
    }
  }
  c.mdc_descriptions = get_or<std::vector<int>>(j, "mdc_descriptions", c.mdc_descriptions, where);
  c.mdc_redundancy = get_or<std::vector<double>>(j, "mdc_redundancy", c.mdc_redundancy, where);
  c.mdc_full_redundancy = get_or<bool>(j, "mdc_full_redundancy", c.mdc_full_redundancy, where);
  const auto relay = get_or<std::string>(j, "relay_mode", "on_off", where);
  if (relay == "on_off") c.relay_mode = RelayMode::OnOff;
  else if (relay == "always_on") c.relay_mode = RelayMode::AlwaysOn;
  else if (relay == "off") c.relay_mode = RelayMode::Off;
  else throw ConfigError(where + ".relay_mode: unknown mode '" + relay + "'");
  c.outcome_cap = get_or<std::size_t>(j, "outcome_cap", c.outcome_cap, where);
  c.u_min = get_or<double>(j, "u_min", c.u_min, where);
  c.threshold = get_or<double>(j, "threshold", c.threshold, where);
  if (j.contains("bit_table")) {
    c.bit_table.clear();
    for (const auto& row : get<std::vector<std::vector<double>>>(j, "bit_table", where)) {
      if (row.size() != 2) throw ConfigError(where + ".bit_table rows must be [dB, bits]");
      c.bit_table.emplace_back(row[0], row[1]);
    }
  }
  c.bit_floor = get_or<double>(j, "bit_floor", c.bit_floor, where);
  sc.joseph = get_or<bool>(j, "joseph", false, where);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()));
  }
}

}  // namespace

const char* to_string(PredictionMode mode) {
  switch (mode) {
    case PredictionMode::Known: return "known";
    case PredictionMode::Predicted: return "predicted";
    case PredictionMode::Fixed: return "fixed";
    case PredictionMode::Fsmc: return "fsmc";
  }
  return "?";
}

void Scenario::validate() const {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  plant.validate();
  if (design) {
    design->validate();
    if (design->dim() != plant.dim() || design->sensor_count() != plant.sensor_count())
      throw ConfigError("design_plant must have the same dimensions as plant");
  }
  const std::size_t M = plant.sensors.size();
  const std::size_t L = relays.size();
  if (channel.sensor_gw.size() != M) throw ConfigError("channel.sensor_gw must have one link per sensor");
  if (channel.sensor_relay.size() != L || channel.relay_gw.size() != L)
    throw ConfigError("channel relay links must match the relay count");
  for (const auto& row : channel.sensor_relay)
    if (row.size() != M) throw ConfigError("channel.sensor_relay needs one link per sensor for each relay");
  if (channel.fsmc_states < 2) throw ConfigError("channel.fsmc_states must be >= 2");
  energy.validate();
  if (energy.u_max.size() != M) throw ConfigError("energy.u_max must have one entry per sensor");
  if (energy.mu_max.size() != L) throw ConfigError("relay mu_max count mismatch");
  if (u_init.size() != M) throw ConfigError("energy.u_init must have one entry per sensor");
  for (std::size_t m = 0; m < M; ++m)
    if (!(u_init[m] >= 0.0 && u_init[m] <= energy.u_max[m]))
      throw ConfigError("energy.u_init[" + std::to_string(m) + "] must lie in [0, u_max]");
  for (std::size_t l = 0; l < L; ++l) {
    if (relays[l].sensors.empty()) throw ConfigError("relays[" + std::to_string(l) + "].sensors must not be empty");
    for (int m : relays[l].sensors)
      if (m < 0 || m >= static_cast<int>(M))
        throw ConfigError("relays[" + std::to_string(l) + "].sensors has an out-of-range index");
  }
  controller.validate();
  if (controller.u_min > 0.0)
    for (std::size_t m = 0; m < M; ++m)
      if (controller.u_min > energy.u_max[m]) throw ConfigError("controller.u_min exceeds energy.u_max");
}

Scenario scenario_from_json(const json& doc) {
  check_keys(doc,
             {"schema", "name", "horizon", "seed", "replications", "plant", "design_plant", "channel",
              "relays", "energy", "controller"},
             "scenario");
  const int schema = get_or<int>(doc, "schema", kScenarioSchemaVersion, "scenario");
  if (schema != kScenarioSchemaVersion)
    throw ConfigError("scenario.schema: unsupported version " + std::to_string(schema));

  Scenario sc;
  sc.name = get_or<std::string>(doc, "name", sc.name, "scenario");
  sc.horizon = get_or<std::int64_t>(doc, "horizon", sc.horizon, "scenario");
  sc.seed = get_or<std::uint64_t>(doc, "seed", sc.seed, "scenario");
  sc.replications = get_or<int>(doc, "replications", sc.replications, "scenario");
  if (!doc.contains("plant")) throw ConfigError("scenario.plant is required");
  sc.plant = parse_plant(doc["plant"], "plant", nullptr);
  if (doc.contains("design_plant")) sc.design = parse_plant(doc["design_plant"], "design_plant", &sc.plant);
  const std::size_t M = sc.plant.sensors.size();

  if (doc.contains("relays")) {
    if (!doc["relays"].is_array()) throw ConfigError("relays must be an array");
    for (std::size_t l = 0; l < doc["relays"].size(); ++l) {
      const std::string where = "relays[" + std::to_string(l) + "]";
      const auto& jr = doc["relays"][l];
      check_keys(jr, {"mu_max", "sensors"}, where);
      RelaySpec r;
      r.mu_max = get_or<double>(jr, "mu_max", r.mu_max, where);
      if (jr.contains("sensors")) {
        r.sensors = get<std::vector<int>>(jr, "sensors", where);
      } else {
        for (std::size_t m = 0; m < M; ++m) r.sensors.push_back(static_cast<int>(m));
      }
      sc.relays.push_back(r);
    }
  }
  const std::size_t L = sc.relays.size();

  if (!doc.contains("channel")) throw ConfigError("scenario.channel is required");
  const auto& jc = doc["channel"];
  check_keys(jc, {"ber", "sensor_gw", "sensor_relay", "relay_gw", "fsmc_states", "fsmc_training_length"},
             "channel");
  if (jc.contains("ber")) sc.channel.ber = parse_ber(jc["ber"], "channel.ber");
  if (!jc.contains("sensor_gw")) throw ConfigError("channel.sensor_gw is required");
  sc.channel.sensor_gw = parse_links(jc["sensor_gw"], M, "channel.sensor_gw");
  if (L > 0) {
    if (!jc.contains("sensor_relay") || !jc.contains("relay_gw"))
      throw ConfigError("channel.sensor_relay and channel.relay_gw are required when relays are configured");
    const auto& jsr = jc["sensor_relay"];
    if (jsr.is_object()) {
      sc.channel.sensor_relay.assign(L, parse_links(jsr, M, "channel.sensor_relay"));
    } else if (jsr.is_array() && jsr.size() == L) {
      for (std::size_t l = 0; l < L; ++l)
        sc.channel.sensor_relay.push_back(
            parse_links(jsr[l], M, "channel.sensor_relay[" + std::to_string(l) + "]"));
    } else {
      throw ConfigError("channel.sensor_relay must be a link object or one entry per relay");
    }
    sc.channel.relay_gw = parse_links(jc["relay_gw"], L, "channel.relay_gw");
  }
  sc.channel.fsmc_states = get_or<int>(jc, "fsmc_states", sc.channel.fsmc_states, "channel");
  sc.channel.fsmc_training_length =
      get_or<std::size_t>(jc, "fsmc_training_length", sc.channel.fsmc_training_length, "channel");

  const json je = doc.value("energy", json::object());
  check_keys(je, {"r", "E_P", "u_max", "u_init"}, "energy");
  sc.energy.r = get_or<double>(je, "r", 1e8, "energy");
  sc.energy.processing = get_or<double>(je, "E_P", 0.0, "energy");
  sc.energy.u_max = je.contains("u_max") ? number_or_array(je["u_max"], M, "energy.u_max")
                                         : std::vector<double>(M, 3e-4);
  sc.u_init = je.contains("u_init") ? number_or_array(je["u_init"], M, "energy.u_init")
                                    : std::vector<double>(sc.energy.u_max);
  for (const auto& r : sc.relays) sc.energy.mu_max.push_back(r.mu_max);

  if (doc.contains("controller")) parse_controller(doc["controller"], sc, "controller");
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return scenario_from_json(doc);
}

json scenario_to_json(const Scenario& sc) {
  json doc;
  doc["schema"] = kScenarioSchemaVersion;
  doc["name"] = sc.name;
  doc["horizon"] = sc.horizon;
  doc["seed"] = sc.seed;
  doc["replications"] = sc.replications;
  doc["plant"] = plant_to_json(sc.plant);
  if (sc.design) doc["design_plant"] = plant_to_json(*sc.design);

  json ch;
  ch["ber"] = ber_to_json(sc.channel.ber);
  ch["sensor_gw"] = json::array();
  for (const auto& l : sc.channel.sensor_gw) ch["sensor_gw"].push_back(link_to_json(l));
  if (!sc.relays.empty()) {
    ch["sensor_relay"] = json::array();
    for (const auto& row : sc.channel.sensor_relay) {
      json jr = json::array();
      for (const auto& l : row) jr.push_back(link_to_json(l));
      ch["sensor_relay"].push_back(jr);
    }
    ch["relay_gw"] = json::array();
    for (const auto& l : sc.channel.relay_gw) ch["relay_gw"].push_back(link_to_json(l));
  }
  ch["fsmc_states"] = sc.channel.fsmc_states;
  ch["fsmc_training_length"] = sc.channel.fsmc_training_length;
  doc["channel"] = ch;

  doc["relays"] = json::array();
  for (const auto& r : sc.relays) doc["relays"].push_back(json{{"mu_max", r.mu_max}, {"sensors", r.sensors}});
  doc["energy"] = json{{"r", sc.energy.r}, {"E_P", sc.energy.processing}, {"u_max", sc.energy.u_max},
                       {"u_init", sc.u_init}};

  const ControllerConfig& c = sc.controller;
  json jc;
  jc["kind"] = sc.controller_kind == ControllerKind::Predictive ? "predictive" : "simple_logic";
  jc["energy_weight"] = c.energy_weight;
  jc["increments"] = c.increments;
  jc["search"] = search_name(c.search);
  jc["menu"] = json::array();
  for (auto k : c.menu) jc["menu"].push_back(to_string(k));
  jc["mdc_descriptions"] = c.mdc_descriptions;
  jc["mdc_redundancy"] = c.mdc_redundancy;
  jc["mdc_full_redundancy"] = c.mdc_full_redundancy;
  jc["relay_mode"] = relay_mode_name(c.relay_mode);
  jc["outcome_cap"] = c.outcome_cap;
  jc["u_min"] = c.u_min;
  jc["threshold"] = c.threshold;
  jc["bit_table"] = json::array();
  for (const auto& [db, b] : c.bit_table) jc["bit_table"].push_back({db, b});
  jc["bit_floor"] = c.bit_floor;
  jc["joseph"] = sc.joseph;
  doc["controller"] = jc;
  return doc;
}

std::string config_hash(const Scenario& sc) {
  const std::string text = scenario_to_json(sc).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_name(text)));
  return buf;
}

}  // namespace wsnkf
