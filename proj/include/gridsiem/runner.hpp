#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridsiem/engine.hpp"
#include "gridsiem/events.hpp"
#include "gridsiem/probes.hpp"
#include "gridsiem/reaction.hpp"
#include "gridsiem/scenario.hpp"

namespace gridsiem {

struct AttackTruth {
  std::string kind;  // IncidentKind name
  std::string mode;
  std::string target;
  TimeUs start_us = 0;
  TimeUs stop_us = 0;   // configured stop, or when a reaction ended it
  bool detected = false;
  std::optional<std::uint64_t> incident_id;
  std::optional<TimeUs> latency_us;
};

struct IncidentRow {
  Incident incident;
  std::optional<TimeUs> latency_us;  // when it matches an injected attack
  bool false_positive = false;
};

struct ReactionStepRow {
  std::string strategy;
  std::string action;
  std::string target;
  std::string verdict;
  std::optional<std::string> cause;
  std::optional<TimeUs> applied_us;
  double metric_pre = 0;
  double metric_post = 0;
};

struct ReactionRow {
  std::uint64_t incident_id = 0;
  std::string kind;
  std::optional<std::string> error;  // plan could not be built
  std::string outcome;               // verdict of the last attempted step
  std::vector<ReactionStepRow> steps;
};

struct NodeRow {
  std::string node_id;
  bool alive = true;
  double drain_total = 0;
  // Over the attack window (from onset until the attack ended). Zero when
  // the scenario injects no WSN attack.
  double drain_attack = 0;
  std::int64_t data_originated_attack = 0;
  std::int64_t data_dropped_attack = 0;
  double loss_attack = 0;
  bool on_attack_path = false;
  std::vector<std::string> route_at_onset;  // parent chain to the base station
};

struct PathRow {
  std::string routers;  // joined with '-'
  bool enabled = true;
  std::int64_t injected = 0;  // cumulative
};

struct DeliveryRow {
  std::string flow_id;
  TimeUs t_end_us = 0;
  std::int64_t offered = 0;
  std::int64_t delivered = 0;
  double ratio = 1.0;
  std::vector<PathRow> paths;
};

struct ServerRow {
  std::string server_id;
  std::optional<TimeUs> first_saturated_us;
  std::int64_t syn_received = 0;
  std::int64_t syn_rejected = 0;
  std::int64_t expired = 0;
};

struct SourceRow {
  std::string source_id;
  std::string kind;
  std::int64_t collected = 0;
  std::int64_t overflow_dropped = 0;
  std::int64_t parse_errors = 0;
  std::int64_t late_rejected = 0;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  TimeUs duration_us = 0;
  TimeUs tick_us = 0;
  bool reaction_enabled = false;
  bool replayed = false;  // built from a log; only detection fields are set
  std::int64_t events_logged = 0;

  std::vector<AttackTruth> attacks;
  std::vector<IncidentRow> incidents;
  std::int64_t false_positives = 0;
  std::map<std::string, std::int64_t> alarm_counts;
  std::vector<ReactionRow> reactions;
  std::vector<NodeRow> wsn_nodes;
  std::vector<DeliveryRow> monitoring;
  std::vector<ServerRow> servers;
  std::vector<SourceRow> collectors;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<TimeUs> duration_us;
  bool no_reaction = false;
  // Mirror the log to this file while running.
  std::optional<std::filesystem::path> log_path;
};

struct RunResult {
  RunReport report;
  std::vector<NormalizedEvent> log;  // append order
  std::vector<Alert> alerts;
  std::map<std::string, ThresholdProfile> profiles;
  std::string final_digest;  // simulator state at the end of the run
};

/// Profiles learned from a benign variant of the scenario (attacks and
/// surges removed, same seed).
std::map<std::string, ThresholdProfile> train_profiles(const ScenarioConfig& cfg);

/// Runs the scenario. Throws ConfigInvalid for a bad config or overrides.
RunResult run(ScenarioConfig cfg, const RunOptions& options = {});

/// Re-runs the rule and correlation engines over a stored log.
RunReport replay(const std::vector<NormalizedEvent>& log, const std::vector<CorrelationRule>& rules);
/// Throws LogCorrupt with the offending line.
RunReport replay_file(const std::filesystem::path& log_path, const std::vector<CorrelationRule>& rules);

/// Feeds the non-engine events of a log (any order) to a fresh engine in
/// (ts, id) order. Shared by replay and the tests.
Engine replay_engine(const std::vector<NormalizedEvent>& log, const std::vector<CorrelationRule>& rules);

/// Matches incidents to injected attacks and fills latency and false-positive
/// fields of the report.
void account(RunReport& report, const std::vector<CorrelationRule>& rules);

std::string render_machine(const RunReport& report);
std::string render_human(const RunReport& report);
/// Inverse of render_machine. Throws Error for malformed input.
RunReport parse_machine_report(const std::string& text);

}  // namespace gridsiem
