#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsnkf/channel.hpp"
#include "wsnkf/controller.hpp"
#include "wsnkf/link.hpp"
#include "wsnkf/plant.hpp"

namespace wsnkf {

inline constexpr int kScenarioSchemaVersion = 1;

struct LinkConfig {
  ArLinkModel ar;
  PredictionSpec prediction;
};

struct ChannelConfig {
  BerModel ber;
  std::vector<LinkConfig> sensor_gw;                  // [m]
  std::vector<std::vector<LinkConfig>> sensor_relay;  // [l][m]
  std::vector<LinkConfig> relay_gw;                   // [l]
  int fsmc_states = 12;
  std::size_t fsmc_training_length = 5000;
};

enum class ControllerKind { Predictive, SimpleLogic };

struct Scenario {
  std::string name = "scenario";
  std::int64_t horizon = 5000;
  std::uint64_t seed = 1;
  int replications = 1;
  PlantModel plant;
  std::optional<PlantModel> design;  // defaults to `plant`
  ChannelConfig channel;
  std::vector<RelaySpec> relays;
  EnergyParams energy;
  std::vector<double> u_init;
  ControllerKind controller_kind = ControllerKind::Predictive;
  ControllerConfig controller;
  bool joseph = false;

  const PlantModel& design_model() const { return design ? *design : plant; }
  int sensor_count() const { return plant.sensor_count(); }
  int relay_count() const { return static_cast<int>(relays.size()); }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses and validates a scenario document. Unknown keys are rejected.
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical document: every field written explicitly, keys sorted.
nlohmann::json scenario_to_json(const Scenario& sc);

/// FNV-1a of the canonical document, as 16 hex digits.
std::string config_hash(const Scenario& sc);

const char* to_string(PredictionMode mode);

}  // namespace wsnkf
