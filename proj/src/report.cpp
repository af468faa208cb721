#include <fmt/format.h>

#include <cmath>
#include <limits>
#include "json.hpp"

#include "gridsiem/errors.hpp"
#include "gridsiem/runner.hpp"

namespace gridsiem {

namespace {

using json = nlohmann::ordered_json;

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// JSON has no infinities; they travel as null.
json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_of(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

template <class T>
std::optional<T> opt_of(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

json to_json(const RunReport& r) {
  json j;
  j["scenario"] = r.scenario;
  j["seed"] = r.seed;
  j["duration_us"] = r.duration_us;
  j["tick_us"] = r.tick_us;
  j["reaction_enabled"] = r.reaction_enabled;
  j["replayed"] = r.replayed;
  j["events_logged"] = r.events_logged;

  j["attacks"] = json::array();
  for (const auto& a : r.attacks) {
    j["attacks"].push_back({{"kind", a.kind},
                            {"mode", a.mode},
                            {"target", a.target},
                            {"start_us", a.start_us},
                            {"stop_us", a.stop_us},
                            {"detected", a.detected},
                            {"incident_id", opt(a.incident_id)},
                            {"latency_us", opt(a.latency_us)}});
  }
  j["incidents"] = json::array();
  for (const auto& row : r.incidents) {
    const auto& i = row.incident;
    j["incidents"].push_back({{"incident_id", i.incident_id},
                              {"kind", std::string(to_string(i.kind))},
                              {"confidence", std::string(to_string(i.confidence))},
                              {"culprit", opt(i.culprit)},
                              {"rule_id", i.rule_id},
                              {"window_start_us", i.window_start_us},
                              {"detected_us", i.window_end_us},
                              {"latency_us", opt(row.latency_us)},
                              {"false_positive", row.false_positive},
                              {"alert_ids", i.contributing_alert_ids},
                              {"details", i.details}});
  }
  j["false_positives"] = r.false_positives;
  j["alarm_counts"] = json::object();
  for (const auto& [k, v] : r.alarm_counts) j["alarm_counts"][k] = v;

  j["reactions"] = json::array();
  for (const auto& p : r.reactions) {
    json steps = json::array();
    for (const auto& s : p.steps) {
      steps.push_back({{"strategy", s.strategy},
                       {"action", s.action},
                       {"target", s.target},
                       {"verdict", s.verdict},
                       {"cause", opt(s.cause)},
                       {"applied_us", opt(s.applied_us)},
                       {"metric_pre", real(s.metric_pre)},
                       {"metric_post", real(s.metric_post)}});
    }
    j["reactions"].push_back({{"incident_id", p.incident_id},
                              {"kind", p.kind},
                              {"error", opt(p.error)},
                              {"outcome", p.outcome},
                              {"steps", steps}});
  }
  j["wsn_nodes"] = json::array();
  for (const auto& n : r.wsn_nodes) {
    j["wsn_nodes"].push_back({{"node_id", n.node_id},
                              {"alive", n.alive},
                              {"drain_total", real(n.drain_total)},
                              {"drain_attack", real(n.drain_attack)},
                              {"data_originated_attack", n.data_originated_attack},
                              {"data_dropped_attack", n.data_dropped_attack},
                              {"loss_attack", real(n.loss_attack)},
                              {"on_attack_path", n.on_attack_path},
                              {"route_at_onset", n.route_at_onset}});
  }
  j["monitoring"] = json::array();
  for (const auto& d : r.monitoring) {
    json paths = json::array();
    for (const auto& p : d.paths) {
      paths.push_back({{"routers", p.routers}, {"enabled", p.enabled}, {"injected", p.injected}});
    }
    j["monitoring"].push_back({{"flow_id", d.flow_id},
                               {"t_end_us", d.t_end_us},
                               {"offered", d.offered},
                               {"delivered", d.delivered},
                               {"ratio", real(d.ratio)},
                               {"paths", paths}});
  }
  j["servers"] = json::array();
  for (const auto& s : r.servers) {
    j["servers"].push_back({{"server_id", s.server_id},
                            {"first_saturated_us", opt(s.first_saturated_us)},
                            {"syn_received", s.syn_received},
                            {"syn_rejected", s.syn_rejected},
                            {"expired", s.expired}});
  }
  j["collectors"] = json::array();
  for (const auto& c : r.collectors) {
    j["collectors"].push_back({{"source_id", c.source_id},
                               {"kind", c.kind},
                               {"collected", c.collected},
                               {"overflow_dropped", c.overflow_dropped},
                               {"parse_errors", c.parse_errors},
                               {"late_rejected", c.late_rejected}});
  }
  return j;
}

RunReport from_json(const json& j) {
  RunReport r;
  r.scenario = j.at("scenario").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.duration_us = j.at("duration_us").get<TimeUs>();
  r.tick_us = j.at("tick_us").get<TimeUs>();
  r.reaction_enabled = j.at("reaction_enabled").get<bool>();
  r.replayed = j.at("replayed").get<bool>();
  r.events_logged = j.at("events_logged").get<std::int64_t>();
  for (const auto& a : j.at("attacks")) {
    AttackTruth t;
    t.kind = a.at("kind").get<std::string>();
    t.mode = a.at("mode").get<std::string>();
    t.target = a.at("target").get<std::string>();
    t.start_us = a.at("start_us").get<TimeUs>();
    t.stop_us = a.at("stop_us").get<TimeUs>();
    t.detected = a.at("detected").get<bool>();
    t.incident_id = opt_of<std::uint64_t>(a.at("incident_id"));
    t.latency_us = opt_of<TimeUs>(a.at("latency_us"));
    r.attacks.push_back(t);
  }
  for (const auto& x : j.at("incidents")) {
    IncidentRow row;
    auto& i = row.incident;
    i.incident_id = x.at("incident_id").get<std::uint64_t>();
    const auto kind = parse_incident_kind(x.at("kind").get<std::string>());
    const auto conf = parse_confidence(x.at("confidence").get<std::string>());
    if (!kind || !conf) throw Error("report: malformed incident kind or confidence");
    i.kind = *kind;
    i.confidence = *conf;
    i.culprit = opt_of<std::string>(x.at("culprit"));
    i.rule_id = x.at("rule_id").get<std::string>();
    i.window_start_us = x.at("window_start_us").get<TimeUs>();
    i.window_end_us = x.at("detected_us").get<TimeUs>();
    i.contributing_alert_ids = x.at("alert_ids").get<std::vector<std::uint64_t>>();
    i.details = x.at("details").get<std::string>();
    row.latency_us = opt_of<TimeUs>(x.at("latency_us"));
    row.false_positive = x.at("false_positive").get<bool>();
    r.incidents.push_back(row);
  }
  r.false_positives = j.at("false_positives").get<std::int64_t>();
  for (const auto& [k, v] : j.at("alarm_counts").items()) r.alarm_counts[k] = v.get<std::int64_t>();
  for (const auto& x : j.at("reactions")) {
    ReactionRow p;
    p.incident_id = x.at("incident_id").get<std::uint64_t>();
    p.kind = x.at("kind").get<std::string>();
    p.error = opt_of<std::string>(x.at("error"));
    p.outcome = x.at("outcome").get<std::string>();
    for (const auto& s : x.at("steps")) {
      ReactionStepRow st;
      st.strategy = s.at("strategy").get<std::string>();
      st.action = s.at("action").get<std::string>();
      st.target = s.at("target").get<std::string>();
      st.verdict = s.at("verdict").get<std::string>();
      st.cause = opt_of<std::string>(s.at("cause"));
      st.applied_us = opt_of<TimeUs>(s.at("applied_us"));
      st.metric_pre = real_of(s.at("metric_pre"));
      st.metric_post = real_of(s.at("metric_post"));
      p.steps.push_back(st);
    }
    r.reactions.push_back(p);
  }
  for (const auto& x : j.at("wsn_nodes")) {
    NodeRow n;
    n.node_id = x.at("node_id").get<std::string>();
    n.alive = x.at("alive").get<bool>();
    n.drain_total = real_of(x.at("drain_total"));
    n.drain_attack = real_of(x.at("drain_attack"));
    n.data_originated_attack = x.at("data_originated_attack").get<std::int64_t>();
    n.data_dropped_attack = x.at("data_dropped_attack").get<std::int64_t>();
    n.loss_attack = real_of(x.at("loss_attack"));
    n.on_attack_path = x.at("on_attack_path").get<bool>();
    n.route_at_onset = x.at("route_at_onset").get<std::vector<std::string>>();
    r.wsn_nodes.push_back(n);
  }
  for (const auto& x : j.at("monitoring")) {
    DeliveryRow d;
    d.flow_id = x.at("flow_id").get<std::string>();
    d.t_end_us = x.at("t_end_us").get<TimeUs>();
    d.offered = x.at("offered").get<std::int64_t>();
    d.delivered = x.at("delivered").get<std::int64_t>();
    d.ratio = real_of(x.at("ratio"));
    for (const auto& p : x.at("paths")) {
      d.paths.push_back({p.at("routers").get<std::string>(), p.at("enabled").get<bool>(),
                         p.at("injected").get<std::int64_t>()});
    }
    r.monitoring.push_back(d);
  }
  for (const auto& x : j.at("servers")) {
    r.servers.push_back({x.at("server_id").get<std::string>(), opt_of<TimeUs>(x.at("first_saturated_us")),
                         x.at("syn_received").get<std::int64_t>(), x.at("syn_rejected").get<std::int64_t>(),
                         x.at("expired").get<std::int64_t>()});
  }
  for (const auto& x : j.at("collectors")) {
    r.collectors.push_back({x.at("source_id").get<std::string>(), x.at("kind").get<std::string>(),
                            x.at("collected").get<std::int64_t>(), x.at("overflow_dropped").get<std::int64_t>(),
                            x.at("parse_errors").get<std::int64_t>(), x.at("late_rejected").get<std::int64_t>()});
  }
  return r;
}

std::string secs(TimeUs us) {
  if (us == std::numeric_limits<TimeUs>::max()) return "-";
  return fmt::format("{:.1f}", static_cast<double>(us) / 1e6);
}

template <class T>
std::string or_dash(const std::optional<T>& v) {
  if (!v) return "-";
  if constexpr (std::is_same_v<T, TimeUs>) {
    return secs(*v);
  } else {
    return fmt::format("{}", *v);
  }
}

}  // namespace

std::string render_machine(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

RunReport parse_machine_report(const std::string& text) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
}

std::string render_human(const RunReport& r) {
  std::string out;
  auto line = [&out](const std::string& s) { out += s + "\n"; };
  line(fmt::format("scenario {}  seed {}  duration {} s  reaction {}{}", r.scenario, r.seed, secs(r.duration_us),
                   r.reaction_enabled ? "on" : "off", r.replayed ? "  (replayed from log)" : ""));
  line("");

  std::map<std::uint64_t, std::string> outcome;
  for (const auto& p : r.reactions) outcome[p.incident_id] = p.error ? "error" : p.outcome;
  line("INCIDENTS");
  line(fmt::format("{:>4}  {:<17} {:<10} {:<8} {:>10} {:>10}  {}", "id", "kind", "confidence", "culprit", "detected_s",
                   "latency_s", "reaction"));
  for (const auto& row : r.incidents) {
    const auto& i = row.incident;
    auto it = outcome.find(i.incident_id);
    line(fmt::format("{:>4}  {:<17} {:<10} {:<8} {:>10} {:>10}  {}{}", i.incident_id, to_string(i.kind),
                     to_string(i.confidence), i.culprit.value_or("-"), secs(i.window_end_us), or_dash(row.latency_us),
                     it == outcome.end() ? "-" : it->second, row.false_positive ? "  [false positive]" : ""));
  }
  line(fmt::format("false positives: {}", r.false_positives));

  if (!r.attacks.empty()) {
    line("");
    line("ATTACKS");
    line(fmt::format("  {:<17} {:<18} {:<8} {:>8} {:>8}  {:<8} {:>9}", "kind", "mode", "target", "start_s", "stop_s",
                     "detected", "latency_s"));
    for (const auto& a : r.attacks) {
      line(fmt::format("  {:<17} {:<18} {:<8} {:>8} {:>8}  {:<8} {:>9}", a.kind, a.mode, a.target, secs(a.start_us),
                       secs(a.stop_us), a.detected ? "yes" : "MISSED", or_dash(a.latency_us)));
    }
  }

  if (!r.reactions.empty()) {
    line("");
    line("REACTIONS");
    line(fmt::format("  {:>8} {:>4}  {:<10} {:<22} {:<12} {:<12} {:>9} {:>9}  {}", "incident", "step", "strategy",
                     "action", "target", "verdict", "pre", "post", "note"));
    for (const auto& p : r.reactions) {
      if (p.error) {
        line(fmt::format("  {:>8}  plan not built: {}", p.incident_id, *p.error));
        continue;
      }
      for (std::size_t k = 0; k < p.steps.size(); ++k) {
        const auto& s = p.steps[k];
        line(fmt::format("  {:>8} {:>4}  {:<10} {:<22} {:<12} {:<12} {:>9.3f} {:>9.3f}  {}", p.incident_id, k,
                         s.strategy, s.action, s.target, s.verdict, s.metric_pre, s.metric_post,
                         s.cause.value_or("")));
      }
    }
  }

  if (!r.monitoring.empty()) {
    line("");
    line("MONITORING DELIVERY");
    line(fmt::format("  {:<8} {:>8} {:>8} {:>9} {:>7}  {}", "flow", "t_end_s", "offered", "delivered", "ratio",
                     "paths (enabled*)"));
    for (const auto& d : r.monitoring) {
      std::string paths;
      for (const auto& p : d.paths) paths += (paths.empty() ? "" : " ") + p.routers + (p.enabled ? "*" : "");
      line(fmt::format("  {:<8} {:>8} {:>8} {:>9} {:>7.4f}  {}", d.flow_id, secs(d.t_end_us), d.offered, d.delivered,
                       d.ratio, paths));
    }
  }

  if (!r.wsn_nodes.empty()) {
    line("");
    line("WSN BATTERY");
    line(fmt::format("  {:<6} {:<5} {:>11} {:>12} {:>11}  {}", "node", "alive", "drain_total", "drain_attack",
                     "loss_attack", "on_attack_path"));
    for (const auto& n : r.wsn_nodes) {
      line(fmt::format("  {:<6} {:<5} {:>11.2f} {:>12.2f} {:>11.4f}  {}", n.node_id, n.alive ? "yes" : "no",
                       n.drain_total, n.drain_attack, n.loss_attack, n.on_attack_path ? "yes" : ""));
    }
  }

  if (!r.servers.empty()) {
    line("");
    line("SERVERS");
    for (const auto& s : r.servers) {
      line(fmt::format("  {}  half-open table first full at {} s, {} SYN received, {} rejected, {} expired",
                       s.server_id, or_dash(s.first_saturated_us), s.syn_received, s.syn_rejected, s.expired));
    }
  }

  if (!r.alarm_counts.empty()) {
    line("");
    line("COUNTS");
    for (const auto& [k, v] : r.alarm_counts) line(fmt::format("  {:<32} {}", k, v));
  }
  return out;
}

}  // namespace gridsiem
