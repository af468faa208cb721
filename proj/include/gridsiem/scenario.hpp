#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridsiem/collect.hpp"
#include "gridsiem/engine.hpp"
#include "gridsiem/gps.hpp"
#include "gridsiem/ipnet.hpp"
#include "gridsiem/probes.hpp"
#include "gridsiem/reaction.hpp"
#include "gridsiem/wsn.hpp"

namespace gridsiem {

struct ProbeToggles {
  bool wsn = true;
  bool app = true;
  bool traffic = true;
  bool host = true;
  bool gps = true;
};

struct CollectorSettings {
  CollectorConfig wsn;
  CollectorConfig app;
  CollectorConfig traffic;
  CollectorConfig host;
  CollectorConfig gps;
};

struct ScenarioConfig {
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  TimeUs duration_us = 300 * kUsPerSecond;
  TimeUs tick_us = 100'000;

  TimeUs wsn_period_us = 60 * kUsPerSecond;
  TimeUs app_window_us = 10 * kUsPerSecond;
  TimeUs traffic_window_us = 5 * kUsPerSecond;
  TimeUs gps_epoch_us = kUsPerSecond;
  TimeUs training_us = 300 * kUsPerSecond;
  double k = 3.0;  // multiplier for every trained profile

  std::optional<WsnConfig> wsn;
  std::string app_server_id = "appsrv";
  std::optional<IpNetConfig> ipnet;
  std::vector<std::string> traffic_probe_routers;  // empty: every router
  std::optional<GpsConfig> gps;
  GpsProbeConfig gps_probe;

  std::optional<AttackConfigWsn> wsn_attack;
  std::optional<DdosConfig> ddos;
  std::optional<SpoofConfig> spoof;
  // Position of each attack in the `attacks:` list, for error paths.
  std::map<std::string, std::size_t> attack_index;

  ProbeToggles probes;
  CollectorSettings collectors;
  std::vector<CorrelationRule> rules = default_rules();
  StrategyCatalog catalog = default_catalog();
  bool reaction_enabled = true;
};

/// Parses a scenario document. Throws ConfigInvalid whose message starts
/// with the offending field path (e.g. "attacks[0].attacker: ...").
ScenarioConfig parse_scenario(const std::string& yaml_text);
ScenarioConfig load_scenario(const std::string& path);

/// Cross-field checks (ids resolve, tick divides periods, ...). Throws
/// ConfigInvalid naming the field.
void validate_scenario(const ScenarioConfig& cfg);

/// Rule set from any document with an optional `rules:` section; the
/// built-in rules when the section is absent.
std::vector<CorrelationRule> parse_rules(const std::string& yaml_text);
std::vector<CorrelationRule> load_rules(const std::string& path);

}  // namespace gridsiem
