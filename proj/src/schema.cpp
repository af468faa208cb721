#include "gridsiem/schema.hpp"

#include "gridsiem/errors.hpp"

namespace gridsiem {

namespace {

constexpr AttrSpec req(ScalarKind k) { return {k, true}; }
constexpr AttrSpec opt(ScalarKind k) { return {k, false}; }

constexpr auto I = ScalarKind::Integer;
constexpr auto R = ScalarKind::Real;
constexpr auto S = ScalarKind::String;

std::string_view kind_name(ScalarKind k) {
  switch (k) {
    case ScalarKind::Integer: return "integer";
    case ScalarKind::Real: return "real";
    case ScalarKind::String: return "string";
  }
  return "?";
}

}  // namespace

SchemaRegistry SchemaRegistry::builtin() {
  SchemaRegistry r;
  // probe reports
  r.types_["packet_rate_report"] = {{"node_id", req(S)},
                                    {"rate_pps", req(R)},
                                    {"reporting_period_us", opt(I)},
                                    {"baseline_pps", opt(R)},
                                    {"threshold_pps", opt(R)}};
  r.types_["arrival_rate_alarm"] = {{"server_id", req(S)},
                                    {"rate_pps", req(R)},
                                    {"threshold_pps", req(R)},
                                    {"window_us", opt(I)}};
  r.types_["traffic_report"] = {{"router_id", req(S)},     {"syn_pps", req(R)},
                                {"synack_pps", req(R)},    {"ack_pps", req(R)},
                                {"syn_to_ack_ratio", req(R)}, {"window_us", opt(I)},
                                {"threshold", opt(R)},     {"anomaly", opt(I)}};
  r.types_["host_report"] = {{"server_id", req(S)}, {"half_open_count", req(I)},
                             {"half_open_capacity", req(I)}, {"occupancy", req(R)},
                             {"threshold", opt(R)}, {"anomaly", opt(I)}};
  r.types_["sat_observation"] = {{"receiver_id", req(S)}, {"sat_id", req(S)}, {"cn0_dbhz", req(R)}};
  r.types_["constellation_report"] = {
      {"receiver_id", req(S)}, {"n_sats", req(I)}, {"sat_ids", req(S)}};
  r.types_["gps_abs_alarm"] = {
      {"receiver_id", req(S)}, {"mean_cn0_dbhz", req(R)}, {"threshold", req(R)}};
  r.types_["gps_rel_alarm"] = {{"receiver_id", req(S)}, {"delta_dbhz", req(R)}, {"threshold", req(R)}};
  r.types_["gps_persat_alarm"] = {{"receiver_id", req(S)}, {"sat_id", req(S)}, {"test", req(S)},
                                  {"value", req(R)},       {"threshold", req(R)}};
  r.types_["gps_const_alarm"] = {
      {"receiver_id", req(S)}, {"churn", req(I)}, {"n_prev", req(I)}, {"n_now", req(I)}};

  // simulator annotations
  r.types_["attack_injected"] = {{"attack_kind", req(S)}, {"mode", req(S)}, {"target", req(S)}};
  r.types_["attack_ended"] = {{"attack_kind", req(S)}, {"reason", req(S)}};
  r.types_["ddos_instruct"] = {{"master", req(S)}, {"agent", req(S)}, {"target", req(S)}};
  r.types_["pdc_discrepancy"] = {{"pmu_a", req(S)},
                                 {"pmu_b", req(S)},
                                 {"discrepancy_us", req(R)},
                                 {"tainted", req(I)}};
  r.types_["wsn_node_died"] = {{"node_id", req(S)}};

  // SIEM internal
  r.types_["threshold_profile"] = {{"signal", req(S)},
                                   {"mean", req(R)},
                                   {"stddev", req(R)},
                                   {"k", req(R)},
                                   {"threshold", req(R)}};
  r.types_["alert"] = {{"alert_id", req(I)},  {"rule_id", req(S)}, {"source_event_ids", req(S)},
                       {"subject", opt(S)},   {"value", opt(R)},   {"threshold", opt(R)},
                       {"baseline", opt(R)},  {"severe", opt(I)}};
  r.types_["incident"] = {{"incident_id", req(I)},    {"kind", req(S)},
                          {"confidence", req(S)},     {"culprit", opt(S)},
                          {"window_start_us", req(I)}, {"window_end_us", req(I)},
                          {"detected_us", req(I)},    {"alert_ids", req(S)},
                          {"rule_id", req(S)},        {"details", opt(S)}};
  r.types_["reaction_step"] = {{"incident_id", req(I)}, {"step", req(I)},   {"strategy", req(S)},
                               {"action", req(S)},      {"target", req(S)}, {"verdict", req(S)},
                               {"cause", opt(S)}};
  r.types_["collector_overflow"] = {{"source", req(S)}, {"dropped", req(I)}};
  return r;
}

void SchemaRegistry::register_type(const std::string& event_type, const EventTypeSpec& spec) {
  auto it = types_.find(event_type);
  if (it == types_.end()) {
    types_.emplace(event_type, spec);
    return;
  }
  for (const auto& [key, attr] : spec) {
    auto existing = it->second.find(key);
    if (existing == it->second.end()) {
      if (attr.required) {
        throw SchemaViolation("cannot add required key '" + key + "' to existing type '" +
                              event_type + "'");
      }
      it->second.emplace(key, attr);
    } else if (existing->second.kind != attr.kind) {
      throw SchemaViolation("kind change for '" + event_type + "." + key + "'");
    }
  }
}

const EventTypeSpec& SchemaRegistry::spec(const std::string& event_type) const {
  auto it = types_.find(event_type);
  if (it == types_.end()) throw SchemaViolation("unknown event_type '" + event_type + "'");
  return it->second;
}

std::vector<std::string> SchemaRegistry::event_types() const {
  std::vector<std::string> out;
  for (const auto& [name, spec] : types_) out.push_back(name);
  return out;
}

void SchemaRegistry::validate(const NormalizedEvent& e) const {
  const auto& s = spec(e.event_type);
  for (const auto& [key, value] : e.attrs) {
    auto it = s.find(key);
    if (it == s.end()) {
      throw SchemaViolation("unknown attr '" + key + "' for event_type '" + e.event_type + "'");
    }
    if (kind_of(value) != it->second.kind) {
      throw SchemaViolation("attr '" + key + "' of '" + e.event_type + "' must be " +
                            std::string(kind_name(it->second.kind)));
    }
  }
  for (const auto& [key, attr] : s) {
    if (attr.required && !e.attrs.count(key)) {
      throw SchemaViolation("missing attr '" + key + "' for event_type '" + e.event_type + "'");
    }
  }
}

}  // namespace gridsiem
