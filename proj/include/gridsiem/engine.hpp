#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gridsiem/events.hpp"

namespace gridsiem {

enum class IncidentKind { SleepDeprivation, SynFlood, GpsSpoof };
enum class Confidence { Low, Medium, High };

std::string_view to_string(IncidentKind k);
std::string_view to_string(Confidence c);
std::optional<IncidentKind> parse_incident_kind(std::string_view s);
std::optional<Confidence> parse_confidence(std::string_view s);

struct Alert {
  std::uint64_t alert_id = 0;
  std::string rule_id;
  TimeUs ts_us = 0;
  Severity severity = Severity::Info;
  std::vector<std::uint64_t> source_event_ids;
  SourceKind source_kind = SourceKind::Simulator;  // of the triggering event
  std::string event_type;
  std::string subject;  // node, server, router or receiver the alert is about
  double value = 0;
  double threshold = 0;
  double baseline = 0;
  bool severe = false;

  friend bool operator==(const Alert&, const Alert&) = default;
};

struct Incident {
  std::uint64_t incident_id = 0;
  IncidentKind kind = IncidentKind::SleepDeprivation;
  Confidence confidence = Confidence::Low;
  std::optional<std::string> culprit;
  TimeUs window_start_us = 0;  // exclusive
  TimeUs window_end_us = 0;    // inclusive; also the detection time
  std::vector<std::uint64_t> contributing_alert_ids;
  std::string rule_id;
  std::string details;

  friend bool operator==(const Incident&, const Incident&) = default;
};

enum class CorrelationTemplate { SleepDeprivation, SynFlood, GpsSpoof };

std::string_view to_string(CorrelationTemplate t);
std::optional<CorrelationTemplate> parse_template(std::string_view s);

/// Matches the event an alert came from. Unset fields match anything.
struct SourcePredicate {
  std::optional<SourceKind> source_kind;
  std::optional<std::string> event_type;

  bool matches(SourceKind k, const std::string& type) const;
};

struct CorrelationRule {
  std::string rule_id;
  CorrelationTemplate tmpl = CorrelationTemplate::SleepDeprivation;
  TimeUs window_us = 0;
  std::vector<SourcePredicate> required_sources;
  // Outcome name -> confidence. Sleep deprivation reads "both" and
  // "advisory"; SYN flood reads "both", "severe", "mild"; GPS reads the vote
  // count ("2", "3", "4").
  std::map<std::string, Confidence> confidence;
  std::map<std::string, std::string> params;
};

/// Default windows follow the probe cadence: two WSN reports, three traffic
/// windows, three GPS epochs.
CorrelationRule default_sleep_deprivation_rule(TimeUs wsn_period_us = 60 * kUsPerSecond);
CorrelationRule default_syn_flood_rule(TimeUs probe_window_us = 5 * kUsPerSecond);
CorrelationRule default_gps_spoof_rule(TimeUs epoch_us = kUsPerSecond,
                                       bool include_constellation = false);
std::vector<CorrelationRule> default_rules();

/// Throws InvalidRule when the rule breaks its invariants.
void validate_rule(const CorrelationRule& rule);

/// Rule engine plus correlation engine. Feed events in (ts, id) order with
/// eval_rules, then call correlate once per distinct timestamp.
class Engine {
 public:
  Engine() = default;

  /// Throws DuplicateRuleId or InvalidRule.
  std::string register_rule(CorrelationRule rule);
  const std::vector<CorrelationRule>& rules() const { return rules_; }

  /// Simple per-event rules. The alerts are also kept for correlation.
  std::vector<Alert> eval_rules(const NormalizedEvent& event);

  /// Evaluates every correlation rule over its window ending at now_us.
  std::vector<Incident> correlate(TimeUs now_us);

  struct Output {
    std::vector<Alert> alerts;
    std::vector<Incident> incidents;
  };
  /// eval_rules over a group of events sharing one timestamp, then correlate.
  Output ingest(std::span<const NormalizedEvent> same_ts_events);

  const std::vector<Alert>& alerts() const { return all_alerts_; }
  const std::vector<Incident>& incidents() const { return incidents_; }

 private:
  std::optional<Incident> sleep_deprivation(const CorrelationRule& r, TimeUs t,
                                            const std::vector<const Alert*>& w);
  std::optional<Incident> syn_flood(const CorrelationRule& r, TimeUs t,
                                    const std::vector<const Alert*>& w);
  std::vector<Incident> gps_spoof(const CorrelationRule& r, TimeUs t,
                                  const std::vector<const Alert*>& w);
  bool new_episode(const std::string& key, TimeUs t, TimeUs window_us);
  Incident make_incident(const CorrelationRule& r, IncidentKind kind, Confidence c, TimeUs t,
                         const std::vector<const Alert*>& contributing);

  std::vector<CorrelationRule> rules_;
  std::vector<Alert> all_alerts_;
  std::deque<Alert> window_;            // alerts still inside the widest window
  std::map<std::string, TimeUs> last_true_;  // "<rule>/<key>" -> last time the predicate held
  std::vector<Incident> incidents_;
  std::uint64_t next_alert_id_ = 1;
  std::uint64_t next_incident_id_ = 1;
};

/// Log representation of engine output (source_kind Engine).
NormalizedEvent alert_event(const Alert& a, TimeUs ts_us);
NormalizedEvent incident_event(const Incident& i, TimeUs ts_us);

/// Inverse of incident_event, for reports built from a log.
Incident incident_from_event(const NormalizedEvent& e);

std::string join_ids(const std::vector<std::uint64_t>& ids);

}  // namespace gridsiem
