#include "gridsiem/engine.hpp"

#include <algorithm>
#include <limits>

#include "gridsiem/errors.hpp"

namespace gridsiem {

std::string_view to_string(IncidentKind k) {
  switch (k) {
    case IncidentKind::SleepDeprivation: return "SleepDeprivation";
    case IncidentKind::SynFlood: return "SynFlood";
    case IncidentKind::GpsSpoof: return "GpsSpoof";
  }
  return "?";
}

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::Low: return "Low";
    case Confidence::Medium: return "Medium";
    case Confidence::High: return "High";
  }
  return "?";
}

std::optional<IncidentKind> parse_incident_kind(std::string_view s) {
  if (s == "SleepDeprivation") return IncidentKind::SleepDeprivation;
  if (s == "SynFlood") return IncidentKind::SynFlood;
  if (s == "GpsSpoof") return IncidentKind::GpsSpoof;
  return std::nullopt;
}

std::optional<Confidence> parse_confidence(std::string_view s) {
  if (s == "Low") return Confidence::Low;
  if (s == "Medium") return Confidence::Medium;
  if (s == "High") return Confidence::High;
  return std::nullopt;
}

std::string_view to_string(CorrelationTemplate t) {
  switch (t) {
    case CorrelationTemplate::SleepDeprivation: return "sleep_deprivation";
    case CorrelationTemplate::SynFlood: return "syn_flood";
    case CorrelationTemplate::GpsSpoof: return "gps_spoof";
  }
  return "?";
}

std::optional<CorrelationTemplate> parse_template(std::string_view s) {
  if (s == "sleep_deprivation") return CorrelationTemplate::SleepDeprivation;
  if (s == "syn_flood") return CorrelationTemplate::SynFlood;
  if (s == "gps_spoof") return CorrelationTemplate::GpsSpoof;
  return std::nullopt;
}

bool SourcePredicate::matches(SourceKind k, const std::string& type) const {
  return (!source_kind || *source_kind == k) && (!event_type || *event_type == type);
}

CorrelationRule default_sleep_deprivation_rule(TimeUs wsn_period_us) {
  CorrelationRule r;
  r.rule_id = "sleep_deprivation";
  r.tmpl = CorrelationTemplate::SleepDeprivation;
  r.window_us = 2 * wsn_period_us;
  r.required_sources = {{SourceKind::AppProbe, "arrival_rate_alarm"},
                        {SourceKind::WsnProbe, "packet_rate_report"}};
  r.confidence = {{"both", Confidence::High}, {"advisory", Confidence::Low}};
  r.params = {{"advisory", "false"}};
  return r;
}

CorrelationRule default_syn_flood_rule(TimeUs probe_window_us) {
  CorrelationRule r;
  r.rule_id = "syn_flood";
  r.tmpl = CorrelationTemplate::SynFlood;
  r.window_us = 3 * probe_window_us;
  r.required_sources = {{SourceKind::TrafficProbe, "traffic_report"},
                        {SourceKind::HostProbe, "host_report"}};
  r.confidence = {{"both", Confidence::High}, {"severe", Confidence::Medium}, {"mild", Confidence::Low}};
  return r;
}

CorrelationRule default_gps_spoof_rule(TimeUs epoch_us, bool include_constellation) {
  CorrelationRule r;
  r.rule_id = "gps_spoof";
  r.tmpl = CorrelationTemplate::GpsSpoof;
  r.window_us = 3 * epoch_us;
  r.required_sources = {{SourceKind::GpsAbsProbe, std::nullopt},
                        {SourceKind::GpsRelProbe, std::nullopt},
                        {SourceKind::GpsPerSatProbe, "gps_persat_alarm"}};
  if (include_constellation) r.required_sources.push_back({SourceKind::GpsConstProbe, "gps_const_alarm"});
  r.confidence = {{"2", Confidence::Medium}, {"3", Confidence::High}, {"4", Confidence::High}};
  return r;
}

std::vector<CorrelationRule> default_rules() {
  return {default_sleep_deprivation_rule(), default_syn_flood_rule(), default_gps_spoof_rule()};
}

void validate_rule(const CorrelationRule& rule) {
  if (rule.rule_id.empty()) throw InvalidRule("rule_id must not be empty");
  if (rule.window_us <= 0) throw InvalidRule("rule '" + rule.rule_id + "': window must be positive");
  if (rule.required_sources.empty()) {
    throw InvalidRule("rule '" + rule.rule_id + "': required_sources must not be empty");
  }
  if (rule.confidence.empty()) throw InvalidRule("rule '" + rule.rule_id + "': empty confidence table");
}

std::string Engine::register_rule(CorrelationRule rule) {
  validate_rule(rule);
  for (const auto& r : rules_) {
    if (r.rule_id == rule.rule_id) throw DuplicateRuleId("rule '" + rule.rule_id + "' already registered");
  }
  rules_.push_back(std::move(rule));
  return rules_.back().rule_id;
}

std::vector<Alert> Engine::eval_rules(const NormalizedEvent& e) {
  std::vector<Alert> out;
  if (e.source_kind == SourceKind::Engine || e.source_kind == SourceKind::Simulator) return out;

  auto emit = [&](std::string rule_id, Severity sev, std::string subject, double value,
                  double threshold) -> Alert& {
    Alert a;
    a.rule_id = std::move(rule_id);
    a.ts_us = e.ts_us;
    a.severity = sev;
    a.source_event_ids = {e.event_id};
    a.source_kind = e.source_kind;
    a.event_type = e.event_type;
    a.subject = std::move(subject);
    a.value = value;
    a.threshold = threshold;
    a.severe = value > 2 * threshold;
    out.push_back(std::move(a));
    return out.back();
  };

  const auto& type = e.event_type;
  if (type == "packet_rate_report") {
    if (e.has("threshold_pps")) {
      const double rate = e.get_real("rate_pps");
      const double thr = e.get_real("threshold_pps");
      if (rate > thr) {
        auto& a = emit("node_rate_exceeds", Severity::Warning, e.get_string("node_id"), rate, thr);
        a.baseline = e.has("baseline_pps") ? e.get_real("baseline_pps") : 0.0;
      }
    }
  } else if (type == "arrival_rate_alarm") {
    emit("app_rate_exceeds", Severity::Alarm, e.get_string("server_id"), e.get_real("rate_pps"),
         e.get_real("threshold_pps"));
  } else if (type == "traffic_report") {
    if (e.has("anomaly") && e.get_int("anomaly") != 0) {
      emit("syn_ratio_anomaly", Severity::Warning, e.get_string("router_id"),
           e.get_real("syn_to_ack_ratio"), e.get_real("threshold"));
    }
  } else if (type == "host_report") {
    const double occ = e.get_real("occupancy");
    const bool flagged = e.has("anomaly") && e.get_int("anomaly") != 0;
    if (flagged || occ >= 1.0) {
      emit("half_open_saturation", occ >= 1.0 ? Severity::Alarm : Severity::Warning,
           e.get_string("server_id"), occ, e.has("threshold") ? e.get_real("threshold") : 1.0);
    }
  } else if (type == "gps_abs_alarm") {
    emit("gps_abs", Severity::Alarm, e.get_string("receiver_id"), e.get_real("mean_cn0_dbhz"),
         e.get_real("threshold"));
  } else if (type == "gps_rel_alarm") {
    emit("gps_rel", Severity::Alarm, e.get_string("receiver_id"), e.get_real("delta_dbhz"),
         e.get_real("threshold"));
  } else if (type == "gps_persat_alarm") {
    emit("gps_persat", Severity::Alarm, e.get_string("receiver_id"), e.get_real("value"),
         e.get_real("threshold"));
  } else if (type == "gps_const_alarm") {
    emit("gps_const", Severity::Alarm, e.get_string("receiver_id"),
         static_cast<double>(e.get_int("churn")), 0.0);
  }

  for (auto& a : out) {
    a.alert_id = next_alert_id_++;
    window_.push_back(a);
    all_alerts_.push_back(a);
  }
  return out;
}

bool Engine::new_episode(const std::string& key, TimeUs t, TimeUs window_us) {
  auto it = last_true_.find(key);
  const bool fresh = it == last_true_.end() || t - it->second > window_us;
  last_true_[key] = t;
  return fresh;
}

Incident Engine::make_incident(const CorrelationRule& r, IncidentKind kind, Confidence c, TimeUs t,
                               const std::vector<const Alert*>& contributing) {
  Incident inc;
  inc.kind = kind;
  inc.confidence = c;
  inc.window_start_us = t - r.window_us;
  inc.window_end_us = t;
  inc.rule_id = r.rule_id;
  for (const auto* a : contributing) inc.contributing_alert_ids.push_back(a->alert_id);
  std::sort(inc.contributing_alert_ids.begin(), inc.contributing_alert_ids.end());
  return inc;
}

namespace {

double excess_ratio(const Alert& a) {
  if (a.baseline > 0) return a.value / a.baseline;
  if (a.threshold > 0) return a.value / a.threshold;
  return a.value;
}

// Node with the largest rate/baseline ratio; ties go to the smallest id.
std::optional<std::string> argmax_culprit(const std::vector<const Alert*>& node_alerts) {
  std::map<std::string, double> best;
  for (const auto* a : node_alerts) {
    const double r = excess_ratio(*a);
    auto [it, inserted] = best.emplace(a->subject, r);
    if (!inserted) it->second = std::max(it->second, r);
  }
  std::optional<std::string> culprit;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& [node, r] : best) {
    if (r > top) {
      top = r;
      culprit = node;
    }
  }
  return culprit;
}

std::optional<Confidence> lookup(const CorrelationRule& r, const std::string& key) {
  auto it = r.confidence.find(key);
  if (it == r.confidence.end()) return std::nullopt;
  return it->second;
}

}  // namespace

std::optional<Incident> Engine::sleep_deprivation(const CorrelationRule& r, TimeUs t,
                                                  const std::vector<const Alert*>& w) {
  std::vector<const Alert*> app, nodes;
  for (const auto* a : w) {
    if (a->rule_id == "app_rate_exceeds") app.push_back(a);
    if (a->rule_id == "node_rate_exceeds") nodes.push_back(a);
  }
  std::optional<Confidence> conf;
  std::vector<const Alert*> contributing;
  std::vector<const Alert*> suspects;
  if (!app.empty() && !nodes.empty()) {
    conf = lookup(r, "both");
    contributing = w;
    suspects = nodes;
  } else if (app.empty() && !nodes.empty() && r.params.count("advisory") &&
             r.params.at("advisory") == "true") {
    // Extension: a node over its threshold in two consecutive reports with no
    // server-side symptom yields a low-confidence advisory.
    std::map<std::string, int> per_node;
    for (const auto* a : nodes) ++per_node[a->subject];
    for (const auto* a : nodes) {
      if (per_node[a->subject] >= 2) suspects.push_back(a);
    }
    if (!suspects.empty()) {
      conf = lookup(r, "advisory");
      contributing = suspects;
    }
  }
  if (!conf) return std::nullopt;
  if (!new_episode(r.rule_id + "/", t, r.window_us)) return std::nullopt;
  auto inc = make_incident(r, IncidentKind::SleepDeprivation, *conf, t, contributing);
  inc.culprit = argmax_culprit(suspects);
  return inc;
}

std::optional<Incident> Engine::syn_flood(const CorrelationRule& r, TimeUs t,
                                          const std::vector<const Alert*>& w) {
  std::vector<const Alert*> traffic, host;
  for (const auto* a : w) {
    if (a->rule_id == "syn_ratio_anomaly") traffic.push_back(a);
    if (a->rule_id == "half_open_saturation") host.push_back(a);
  }
  if (traffic.empty() && host.empty()) return std::nullopt;
  std::optional<Confidence> conf;
  if (!traffic.empty() && !host.empty()) {
    conf = lookup(r, "both");
  } else {
    const auto& only = traffic.empty() ? host : traffic;
    const bool severe = std::any_of(only.begin(), only.end(), [](const Alert* a) { return a->severe; });
    conf = lookup(r, severe ? "severe" : "mild");
  }
  if (!conf) return std::nullopt;
  if (!new_episode(r.rule_id + "/", t, r.window_us)) return std::nullopt;

  std::vector<const Alert*> contributing = traffic;
  contributing.insert(contributing.end(), host.begin(), host.end());
  auto inc = make_incident(r, IncidentKind::SynFlood, *conf, t, contributing);
  std::set<std::string> routers, servers;
  for (const auto* a : traffic) routers.insert(a->subject);
  for (const auto* a : host) servers.insert(a->subject);
  if (!servers.empty()) {
    inc.culprit = *servers.begin();
  } else if (r.params.count("protected_server")) {
    inc.culprit = r.params.at("protected_server");
  }
  std::string list;
  for (const auto& id : routers) list += (list.empty() ? "" : ",") + id;
  inc.details = "target=" + inc.culprit.value_or("") + ";routers=" + list;
  return inc;
}

std::vector<Incident> Engine::gps_spoof(const CorrelationRule& r, TimeUs t,
                                        const std::vector<const Alert*>& w) {
  std::map<std::string, std::vector<const Alert*>> per_receiver;
  for (const auto* a : w) per_receiver[a->subject].push_back(a);
  std::vector<Incident> out;
  for (const auto& [rx, alerts] : per_receiver) {
    std::set<std::string> techniques;
    for (const auto* a : alerts) techniques.insert(a->rule_id);
    const auto conf = lookup(r, std::to_string(techniques.size()));
    if (!conf) continue;
    if (!new_episode(r.rule_id + "/" + rx, t, r.window_us)) continue;
    auto inc = make_incident(r, IncidentKind::GpsSpoof, *conf, t, alerts);
    inc.culprit = rx;
    std::string list;
    for (const auto& tech : techniques) list += (list.empty() ? "" : ",") + tech;
    inc.details = "votes=" + list;
    out.push_back(std::move(inc));
  }
  return out;
}

std::vector<Incident> Engine::correlate(TimeUs now_us) {
  TimeUs reach = 0;
  for (const auto& r : rules_) reach = std::max(reach, r.window_us);
  while (!window_.empty() && window_.front().ts_us <= now_us - reach) window_.pop_front();

  std::vector<Incident> out;
  for (const auto& r : rules_) {
    std::vector<const Alert*> w;
    for (const auto& a : window_) {
      if (a.ts_us <= now_us - r.window_us || a.ts_us > now_us) continue;
      const bool wanted = std::any_of(r.required_sources.begin(), r.required_sources.end(),
                                      [&](const SourcePredicate& p) { return p.matches(a.source_kind, a.event_type); });
      if (wanted) w.push_back(&a);
    }
    switch (r.tmpl) {
      case CorrelationTemplate::SleepDeprivation:
        if (auto inc = sleep_deprivation(r, now_us, w)) out.push_back(std::move(*inc));
        break;
      case CorrelationTemplate::SynFlood:
        if (auto inc = syn_flood(r, now_us, w)) out.push_back(std::move(*inc));
        break;
      case CorrelationTemplate::GpsSpoof:
        for (auto& inc : gps_spoof(r, now_us, w)) out.push_back(std::move(inc));
        break;
    }
  }
  for (auto& inc : out) {
    inc.incident_id = next_incident_id_++;
    incidents_.push_back(inc);
  }
  return out;
}

Engine::Output Engine::ingest(std::span<const NormalizedEvent> events) {
  Output out;
  if (events.empty()) return out;
  for (const auto& e : events) {
    auto a = eval_rules(e);
    out.alerts.insert(out.alerts.end(), a.begin(), a.end());
  }
  out.incidents = correlate(events.front().ts_us);
  return out;
}

std::string join_ids(const std::vector<std::uint64_t>& ids) {
  std::string s;
  for (auto id : ids) s += (s.empty() ? "" : ",") + std::to_string(id);
  return s;
}

namespace {

std::vector<std::uint64_t> split_ids(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start < s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stoull(s.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

}  // namespace

NormalizedEvent alert_event(const Alert& a, TimeUs ts_us) {
  NormalizedEvent e;
  e.ts_us = ts_us;
  e.source_id = "engine";
  e.source_kind = SourceKind::Engine;
  e.event_type = "alert";
  e.severity = a.severity;
  e.attrs = {{"alert_id", static_cast<std::int64_t>(a.alert_id)},
             {"rule_id", a.rule_id},
             {"source_event_ids", join_ids(a.source_event_ids)},
             {"subject", a.subject},
             {"value", a.value},
             {"threshold", a.threshold},
             {"severe", std::int64_t{a.severe}}};
  if (a.baseline > 0) e.attrs["baseline"] = a.baseline;
  return e;
}

NormalizedEvent incident_event(const Incident& i, TimeUs ts_us) {
  NormalizedEvent e;
  e.ts_us = ts_us;
  e.source_id = "engine";
  e.source_kind = SourceKind::Engine;
  e.event_type = "incident";
  e.severity = Severity::Alarm;
  e.attrs = {{"incident_id", static_cast<std::int64_t>(i.incident_id)},
             {"kind", std::string(to_string(i.kind))},
             {"confidence", std::string(to_string(i.confidence))},
             {"window_start_us", i.window_start_us},
             {"window_end_us", i.window_end_us},
             {"detected_us", i.window_end_us},
             {"alert_ids", join_ids(i.contributing_alert_ids)},
             {"rule_id", i.rule_id}};
  if (i.culprit) e.attrs["culprit"] = *i.culprit;
  if (!i.details.empty()) e.attrs["details"] = i.details;
  return e;
}

Incident incident_from_event(const NormalizedEvent& e) {
  if (e.event_type != "incident") throw Error("not an incident event");
  Incident i;
  i.incident_id = static_cast<std::uint64_t>(e.get_int("incident_id"));
  auto kind = parse_incident_kind(e.get_string("kind"));
  auto conf = parse_confidence(e.get_string("confidence"));
  if (!kind || !conf) throw Error("malformed incident event");
  i.kind = *kind;
  i.confidence = *conf;
  if (e.has("culprit")) i.culprit = e.get_string("culprit");
  i.window_start_us = e.get_int("window_start_us");
  i.window_end_us = e.get_int("window_end_us");
  i.contributing_alert_ids = split_ids(e.get_string("alert_ids"));
  i.rule_id = e.get_string("rule_id");
  if (e.has("details")) i.details = e.get_string("details");
  return i;
}

}  // namespace gridsiem
