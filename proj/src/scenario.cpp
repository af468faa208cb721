#include "gridsiem/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gridsiem/errors.hpp"
#include "gridsiem/store.hpp"

namespace gridsiem {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw ConfigInvalid(path + ": " + msg);
}

std::string sub(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) bad(path.empty() ? "<root>" : path, "expected a mapping");
}

void require_seq(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) bad(path, "expected a list");
}

// Rejects keys outside `allowed`, so typos do not silently fall back to defaults.
void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<std::string_view> allowed) {
  require_map(n, path);
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad(sub(path, key), "unknown key");
    }
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& path, const char* what) {
  if (!n.IsScalar()) bad(path, std::string("expected ") + what);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    bad(path, std::string("expected ") + what + ", got '" + n.Scalar() + "'");
  }
}

std::string str(const YAML::Node& n, const std::string& path) {
  auto s = scalar<std::string>(n, path, "a string");
  if (s.empty()) bad(path, "must not be empty");
  return s;
}

double num(const YAML::Node& n, const std::string& path) {
  const double v = scalar<double>(n, path, "a number");
  if (!std::isfinite(v)) bad(path, "must be finite");
  return v;
}

bool boolean(const YAML::Node& n, const std::string& path) { return scalar<bool>(n, path, "true or false"); }

std::int64_t integer(const YAML::Node& n, const std::string& path) {
  return scalar<std::int64_t>(n, path, "an integer");
}

TimeUs seconds(const YAML::Node& n, const std::string& path) { return seconds_to_us(num(n, path)); }

TimeUs positive_seconds(const YAML::Node& n, const std::string& path) {
  const TimeUs v = seconds(n, path);
  if (v <= 0) bad(path, "must be positive");
  return v;
}

std::vector<std::string> str_list(const YAML::Node& n, const std::string& path) {
  require_seq(n, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(str(n[i], idx(path, i)));
  return out;
}

std::vector<std::pair<std::string, std::string>> pair_list(const YAML::Node& n, const std::string& path) {
  require_seq(n, path);
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto p = idx(path, i);
    if (!n[i].IsSequence() || n[i].size() != 2) bad(p, "expected a pair [a, b]");
    out.emplace_back(str(n[i][0], p + "[0]"), str(n[i][1], p + "[1]"));
  }
  return out;
}

std::map<std::string, std::string> string_map(const YAML::Node& n, const std::string& path) {
  require_map(n, path);
  std::map<std::string, std::string> out;
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    out[key] = scalar<std::string>(kv.second, sub(path, key), "a scalar");
  }
  return out;
}

void parse_wsn(const YAML::Node& n, const std::string& path, ScenarioConfig& cfg) {
  WsnConfig w = wsn_fixture_config();
  if (n.IsNull()) {
    cfg.wsn = w;
    return;
  }
  check_keys(n, path,
             {"base_station", "nodes", "links", "capacity_pps", "ttl", "battery_units", "fool_prob", "energy",
              "loop_nodes", "app_server", "proxy_surge"});
  if (n["base_station"]) w.base_station = str(n["base_station"], sub(path, "base_station"));
  if (n["nodes"]) {
    const auto p = sub(path, "nodes");
    require_seq(n["nodes"], p);
    w.nodes.clear();
    w.extra_links.clear();
    w.loop_nodes.clear();
    for (std::size_t i = 0; i < n["nodes"].size(); ++i) {
      const auto& e = n["nodes"][i];
      const auto pe = idx(p, i);
      check_keys(e, pe, {"id", "parent", "gen_rate_pps"});
      WsnNodeSpec s;
      if (!e["id"]) bad(sub(pe, "id"), "required");
      if (!e["parent"]) bad(sub(pe, "parent"), "required");
      s.id = str(e["id"], sub(pe, "id"));
      s.parent = str(e["parent"], sub(pe, "parent"));
      s.gen_rate_pps = e["gen_rate_pps"] ? num(e["gen_rate_pps"], sub(pe, "gen_rate_pps")) : 5.0;
      if (s.gen_rate_pps < 0) bad(sub(pe, "gen_rate_pps"), "must not be negative");
      w.nodes.push_back(s);
    }
  }
  if (n["links"]) w.extra_links = pair_list(n["links"], sub(path, "links"));
  if (n["loop_nodes"]) w.loop_nodes = str_list(n["loop_nodes"], sub(path, "loop_nodes"));
  if (n["capacity_pps"]) w.capacity_pps = num(n["capacity_pps"], sub(path, "capacity_pps"));
  if (n["ttl"]) w.ttl = static_cast<int>(integer(n["ttl"], sub(path, "ttl")));
  if (n["battery_units"]) w.battery_units = num(n["battery_units"], sub(path, "battery_units"));
  if (n["fool_prob"]) w.fool_prob = num(n["fool_prob"], sub(path, "fool_prob"));
  if (n["energy"]) {
    const auto p = sub(path, "energy");
    check_keys(n["energy"], p, {"c_tx", "c_rx"});
    if (n["energy"]["c_tx"]) w.energy.c_tx = num(n["energy"]["c_tx"], sub(p, "c_tx"));
    if (n["energy"]["c_rx"]) w.energy.c_rx = num(n["energy"]["c_rx"], sub(p, "c_rx"));
  }
  if (n["app_server"]) cfg.app_server_id = str(n["app_server"], sub(path, "app_server"));
  if (n["proxy_surge"]) {
    const auto p = sub(path, "proxy_surge");
    const auto& s = n["proxy_surge"];
    check_keys(s, p, {"rate_pps", "start_s", "stop_s"});
    for (const char* k : {"rate_pps", "start_s", "stop_s"}) {
      if (!s[k]) bad(sub(p, k), "required");
    }
    w.proxy_surge_pps = num(s["rate_pps"], sub(p, "rate_pps"));
    w.proxy_surge_start_us = seconds(s["start_s"], sub(p, "start_s"));
    w.proxy_surge_stop_us = seconds(s["stop_s"], sub(p, "stop_s"));
    if (w.proxy_surge_pps <= 0) bad(sub(p, "rate_pps"), "must be positive");
    if (w.proxy_surge_stop_us <= w.proxy_surge_start_us) bad(sub(p, "stop_s"), "must be after start_s");
  }
  if (w.capacity_pps <= 0) bad(sub(path, "capacity_pps"), "must be positive");
  if (w.ttl < 1) bad(sub(path, "ttl"), "must be at least 1");
  if (w.battery_units <= 0) bad(sub(path, "battery_units"), "must be positive");
  if (w.fool_prob < 0 || w.fool_prob > 1) bad(sub(path, "fool_prob"), "must lie in [0, 1]");
  cfg.wsn = w;
}

void parse_ipnet(const YAML::Node& n, const std::string& path, ScenarioConfig& cfg) {
  IpNetConfig c = ipnet_fixture_config();
  if (n.IsNull()) {
    cfg.ipnet = c;
    return;
  }
  check_keys(n, path,
             {"routers", "router_capacity", "links", "hosts", "servers", "flows", "presplit",
              "traffic_probe_routers"});
  if (n["routers"]) {
    const auto p = sub(path, "routers");
    require_seq(n["routers"], p);
    c.routers.clear();
    for (std::size_t i = 0; i < n["routers"].size(); ++i) {
      const auto& e = n["routers"][i];
      const auto pe = idx(p, i);
      check_keys(e, pe, {"id", "capacity_pps"});
      if (!e["id"]) bad(sub(pe, "id"), "required");
      if (!e["capacity_pps"]) bad(sub(pe, "capacity_pps"), "required");
      c.routers.emplace_back(str(e["id"], sub(pe, "id")), num(e["capacity_pps"], sub(pe, "capacity_pps")));
    }
  }
  if (n["router_capacity"]) {
    const auto p = sub(path, "router_capacity");
    require_map(n["router_capacity"], p);
    for (const auto& kv : n["router_capacity"]) {
      const auto id = kv.first.as<std::string>();
      auto it = std::find_if(c.routers.begin(), c.routers.end(), [&](const auto& r) { return r.first == id; });
      if (it == c.routers.end()) bad(sub(p, id), "unknown router '" + id + "'");
      it->second = num(kv.second, sub(p, id));
    }
  }
  for (const auto& [id, cap] : c.routers) {
    if (cap <= 0) bad(sub(path, "routers"), "router '" + id + "' needs a positive capacity");
  }
  if (n["links"]) c.links = pair_list(n["links"], sub(path, "links"));
  if (n["hosts"]) {
    const auto p = sub(path, "hosts");
    require_seq(n["hosts"], p);
    c.hosts.clear();
    for (std::size_t i = 0; i < n["hosts"].size(); ++i) {
      const auto& e = n["hosts"][i];
      const auto pe = idx(p, i);
      check_keys(e, pe, {"id", "router"});
      if (!e["id"]) bad(sub(pe, "id"), "required");
      if (!e["router"]) bad(sub(pe, "router"), "required");
      c.hosts.emplace_back(str(e["id"], sub(pe, "id")), str(e["router"], sub(pe, "router")));
    }
  }
  if (n["servers"]) {
    const auto p = sub(path, "servers");
    require_seq(n["servers"], p);
    c.servers.clear();
    for (std::size_t i = 0; i < n["servers"].size(); ++i) {
      const auto& e = n["servers"][i];
      const auto pe = idx(p, i);
      check_keys(e, pe, {"id", "router", "half_open_capacity", "syn_timeout_s"});
      IpServerSpec s;
      if (!e["id"]) bad(sub(pe, "id"), "required");
      if (!e["router"]) bad(sub(pe, "router"), "required");
      s.id = str(e["id"], sub(pe, "id"));
      s.router = str(e["router"], sub(pe, "router"));
      if (e["half_open_capacity"]) {
        s.half_open_capacity = integer(e["half_open_capacity"], sub(pe, "half_open_capacity"));
        if (s.half_open_capacity <= 0) bad(sub(pe, "half_open_capacity"), "must be positive");
      }
      if (e["syn_timeout_s"]) s.syn_timeout_us = positive_seconds(e["syn_timeout_s"], sub(pe, "syn_timeout_s"));
      c.servers.push_back(s);
    }
  }
  if (n["flows"]) {
    const auto p = sub(path, "flows");
    require_seq(n["flows"], p);
    c.flows.clear();
    for (std::size_t i = 0; i < n["flows"].size(); ++i) {
      const auto& e = n["flows"][i];
      const auto pe = idx(p, i);
      check_keys(e, pe, {"id", "src", "dst", "rate_pps", "kind"});
      IpFlowSpec f;
      for (const char* k : {"id", "src", "dst", "rate_pps"}) {
        if (!e[k]) bad(sub(pe, k), "required");
      }
      f.id = str(e["id"], sub(pe, "id"));
      f.src = str(e["src"], sub(pe, "src"));
      f.dst = str(e["dst"], sub(pe, "dst"));
      f.rate_pps = num(e["rate_pps"], sub(pe, "rate_pps"));
      if (f.rate_pps <= 0) bad(sub(pe, "rate_pps"), "must be positive");
      if (e["kind"]) {
        const auto k = str(e["kind"], sub(pe, "kind"));
        auto kind = parse_flow_kind(k);
        if (!kind || *kind == FlowKind::Attack) bad(sub(pe, "kind"), "expected monitoring or web, got '" + k + "'");
        f.kind = *kind;
      }
      c.flows.push_back(f);
    }
  }
  if (n["presplit"]) c.presplit = boolean(n["presplit"], sub(path, "presplit"));
  if (n["traffic_probe_routers"]) {
    cfg.traffic_probe_routers = str_list(n["traffic_probe_routers"], sub(path, "traffic_probe_routers"));
  }
  cfg.ipnet = c;
}

void parse_gps(const YAML::Node& n, const std::string& path, ScenarioConfig& cfg) {
  GpsConfig g;
  if (!n.IsNull()) {
    check_keys(n, path,
               {"receivers", "pool_size", "n_visible", "baseline_lo_dbhz", "baseline_hi_dbhz", "jitter_dbhz",
                "rise_set_every", "double_pass_every"});
    if (n["receivers"]) g.receivers = str_list(n["receivers"], sub(path, "receivers"));
    if (n["pool_size"]) g.pool_size = static_cast<int>(integer(n["pool_size"], sub(path, "pool_size")));
    if (n["n_visible"]) g.n_visible = static_cast<int>(integer(n["n_visible"], sub(path, "n_visible")));
    if (n["baseline_lo_dbhz"]) g.baseline_lo_dbhz = num(n["baseline_lo_dbhz"], sub(path, "baseline_lo_dbhz"));
    if (n["baseline_hi_dbhz"]) g.baseline_hi_dbhz = num(n["baseline_hi_dbhz"], sub(path, "baseline_hi_dbhz"));
    if (n["jitter_dbhz"]) g.jitter_dbhz = num(n["jitter_dbhz"], sub(path, "jitter_dbhz"));
    if (n["rise_set_every"]) {
      g.rise_set_every = static_cast<int>(integer(n["rise_set_every"], sub(path, "rise_set_every")));
    }
    if (n["double_pass_every"]) {
      g.double_pass_every = static_cast<int>(integer(n["double_pass_every"], sub(path, "double_pass_every")));
    }
  }
  if (g.receivers.empty()) bad(sub(path, "receivers"), "must name at least one receiver");
  if (g.pool_size < 1) bad(sub(path, "pool_size"), "must be positive");
  if (g.n_visible < 0 || g.n_visible > g.pool_size) bad(sub(path, "n_visible"), "must lie in [0, pool_size]");
  if (g.baseline_hi_dbhz < g.baseline_lo_dbhz) bad(sub(path, "baseline_hi_dbhz"), "must be >= baseline_lo_dbhz");
  if (g.jitter_dbhz < 0) bad(sub(path, "jitter_dbhz"), "must not be negative");
  if (g.rise_set_every < 0) bad(sub(path, "rise_set_every"), "must not be negative");
  if (g.double_pass_every < 0) bad(sub(path, "double_pass_every"), "must not be negative");
  cfg.gps = g;
}

void attack_window(const YAML::Node& e, const std::string& pe, TimeUs& start, TimeUs& stop) {
  if (!e["start_s"]) bad(sub(pe, "start_s"), "required");
  if (!e["stop_s"]) bad(sub(pe, "stop_s"), "required");
  start = seconds(e["start_s"], sub(pe, "start_s"));
  stop = seconds(e["stop_s"], sub(pe, "stop_s"));
  if (start < 0) bad(sub(pe, "start_s"), "must not be negative");
  if (stop <= start) bad(sub(pe, "stop_s"), "must be after start_s");
}

void parse_attacks(const YAML::Node& n, const std::string& path, ScenarioConfig& cfg) {
  require_seq(n, path);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto& e = n[i];
    const auto pe = idx(path, i);
    require_map(e, pe);
    if (!e["kind"]) bad(sub(pe, "kind"), "required");
    const auto kind = str(e["kind"], sub(pe, "kind"));
    if (cfg.attack_index.count(kind)) bad(sub(pe, "kind"), "a scenario holds at most one '" + kind + "' attack");
    if (kind == "sleep_deprivation") {
      check_keys(e, pe, {"kind", "attacker", "mode", "rate_pps", "start_s", "stop_s"});
      AttackConfigWsn a;
      if (!e["attacker"]) bad(sub(pe, "attacker"), "required");
      a.attacker_node = str(e["attacker"], sub(pe, "attacker"));
      if (e["mode"]) {
        const auto m = str(e["mode"], sub(pe, "mode"));
        auto mode = parse_wsn_attack_mode(m);
        if (!mode) bad(sub(pe, "mode"), "unknown mode '" + m + "'");
        a.mode = *mode;
      }
      a.attack_rate_pps = e["rate_pps"] ? num(e["rate_pps"], sub(pe, "rate_pps")) : 250.0;
      if (a.attack_rate_pps <= 0) bad(sub(pe, "rate_pps"), "must be positive");
      attack_window(e, pe, a.start_us, a.stop_us);
      cfg.wsn_attack = a;
    } else if (kind == "syn_flood") {
      check_keys(e, pe, {"kind", "master", "agents", "target", "rate_per_agent_pps", "start_s", "stop_s"});
      DdosConfig d;
      for (const char* k : {"master", "agents", "target", "rate_per_agent_pps"}) {
        if (!e[k]) bad(sub(pe, k), "required");
      }
      d.master_id = str(e["master"], sub(pe, "master"));
      const auto agents = str_list(e["agents"], sub(pe, "agents"));
      if (agents.empty()) bad(sub(pe, "agents"), "must name at least one agent");
      d.agent_ids = {agents.begin(), agents.end()};
      d.target_server = str(e["target"], sub(pe, "target"));
      d.syn_rate_per_agent_pps = num(e["rate_per_agent_pps"], sub(pe, "rate_per_agent_pps"));
      if (d.syn_rate_per_agent_pps <= 0) bad(sub(pe, "rate_per_agent_pps"), "must be positive");
      attack_window(e, pe, d.start_us, d.stop_us);
      cfg.ddos = d;
    } else if (kind == "gps_spoof") {
      check_keys(e, pe, {"kind", "target", "mode", "strength_dbhz", "flat_dbhz", "offset_us", "start_s", "stop_s"});
      SpoofConfig s;
      if (!e["target"]) bad(sub(pe, "target"), "required");
      s.target_receiver = str(e["target"], sub(pe, "target"));
      if (e["mode"]) {
        const auto m = str(e["mode"], sub(pe, "mode"));
        auto mode = parse_spoof_mode(m);
        if (!mode) bad(sub(pe, "mode"), "unknown mode '" + m + "'");
        s.mode = *mode;
      }
      if (e["strength_dbhz"]) s.strength_dbhz = num(e["strength_dbhz"], sub(pe, "strength_dbhz"));
      if (e["flat_dbhz"]) s.flat_dbhz = num(e["flat_dbhz"], sub(pe, "flat_dbhz"));
      if (e["offset_us"]) s.injected_offset_us = num(e["offset_us"], sub(pe, "offset_us"));
      attack_window(e, pe, s.start_us, s.stop_us);
      cfg.spoof = s;
    } else {
      bad(sub(pe, "kind"), "unknown attack kind '" + kind + "' (sleep_deprivation, syn_flood, gps_spoof)");
    }
    cfg.attack_index[kind] = i;
  }
}

CollectorConfig parse_collector(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"mode", "period_s", "batch_max"});
  CollectorConfig c;
  if (n["mode"]) {
    const auto m = str(n["mode"], sub(path, "mode"));
    if (m == "push") {
      c.mode = CollectMode::Push;
    } else if (m == "pull") {
      c.mode = CollectMode::Pull;
    } else {
      bad(sub(path, "mode"), "expected push or pull, got '" + m + "'");
    }
  }
  if (n["period_s"]) c.pull_period_us = positive_seconds(n["period_s"], sub(path, "period_s"));
  if (n["batch_max"]) {
    const auto b = integer(n["batch_max"], sub(path, "batch_max"));
    if (b <= 0) bad(sub(path, "batch_max"), "must be positive");
    c.batch_max = static_cast<std::size_t>(b);
  }
  try {
    validate(c);
  } catch (const Error& e) {
    bad(path, e.what());
  }
  return c;
}

std::vector<CorrelationRule> parse_rule_list(const YAML::Node& n, const std::string& path) {
  require_seq(n, path);
  std::vector<CorrelationRule> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto& e = n[i];
    const auto pe = idx(path, i);
    check_keys(e, pe, {"id", "template", "window_s", "requires", "confidence", "params"});
    for (const char* k : {"id", "template", "window_s", "requires", "confidence"}) {
      if (!e[k]) bad(sub(pe, k), "required");
    }
    CorrelationRule r;
    r.rule_id = str(e["id"], sub(pe, "id"));
    if (!ids.insert(r.rule_id).second) bad(sub(pe, "id"), "duplicate rule id '" + r.rule_id + "'");
    const auto t = str(e["template"], sub(pe, "template"));
    auto tmpl = parse_template(t);
    if (!tmpl) bad(sub(pe, "template"), "unknown template '" + t + "'");
    r.tmpl = *tmpl;
    r.window_us = positive_seconds(e["window_s"], sub(pe, "window_s"));
    const auto preq = sub(pe, "requires");
    require_seq(e["requires"], preq);
    for (std::size_t j = 0; j < e["requires"].size(); ++j) {
      const auto& q = e["requires"][j];
      const auto pq = idx(preq, j);
      check_keys(q, pq, {"source_kind", "event_type"});
      SourcePredicate sp;
      if (q["source_kind"]) {
        const auto k = str(q["source_kind"], sub(pq, "source_kind"));
        sp.source_kind = parse_source_kind(k);
        if (!sp.source_kind) bad(sub(pq, "source_kind"), "unknown source kind '" + k + "'");
      }
      if (q["event_type"]) sp.event_type = str(q["event_type"], sub(pq, "event_type"));
      r.required_sources.push_back(sp);
    }
    const auto pc = sub(pe, "confidence");
    for (const auto& [name, level] : string_map(e["confidence"], pc)) {
      auto c = parse_confidence(level);
      if (!c) bad(sub(pc, name), "unknown confidence '" + level + "'");
      r.confidence[name] = *c;
    }
    if (e["params"]) r.params = string_map(e["params"], sub(pe, "params"));
    try {
      validate_rule(r);
    } catch (const InvalidRule& ex) {
      bad(pe, ex.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

StrategyCatalog parse_catalog(const YAML::Node& n, const std::string& path) {
  require_map(n, path);
  StrategyCatalog c;
  for (const auto& kv : n) {
    const auto kname = kv.first.as<std::string>();
    const auto pk = sub(path, kname);
    auto kind = parse_incident_kind(kname);
    if (!kind) bad(pk, "unknown incident kind");
    require_seq(kv.second, pk);
    auto& list = c[*kind];
    for (std::size_t i = 0; i < kv.second.size(); ++i) {
      const auto& e = kv.second[i];
      const auto pe = idx(pk, i);
      check_keys(e, pe, {"id", "action", "params"});
      if (!e["action"]) bad(sub(pe, "action"), "required");
      Strategy s;
      s.incident_kind = *kind;
      const auto a = str(e["action"], sub(pe, "action"));
      auto action = parse_reaction_action(a);
      if (!action) bad(sub(pe, "action"), "unknown action '" + a + "'");
      s.action = *action;
      s.strategy_id = e["id"] ? str(e["id"], sub(pe, "id")) : a;
      if (e["params"]) s.params = string_map(e["params"], sub(pe, "params"));
      if (action_kind(s.action) != *kind) bad(sub(pe, "action"), a + " cannot treat " + kname);
      if (auto it = s.params.find("success_prob"); it != s.params.end()) {
        auto p = parse_real(it->second);
        if (!p || *p < 0 || *p > 1) bad(sub(sub(pe, "params"), "success_prob"), "must be a number in [0, 1]");
      }
      list.push_back(std::move(s));
    }
  }
  return c;
}

void check_divides(TimeUs tick, TimeUs period, const std::string& path) {
  if (period % tick != 0) bad(path, "must be a multiple of the tick");
}

std::string attack_path(const ScenarioConfig& cfg, const std::string& kind, const std::string& field) {
  auto it = cfg.attack_index.find(kind);
  const std::string base = it == cfg.attack_index.end() ? "attacks[" + kind + "]" : idx("attacks", it->second);
  return sub(base, field);
}

YAML::Node load_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigInvalid("<document>: " + std::string(e.what()));
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& yaml_text) {
  const YAML::Node root = load_yaml(yaml_text);
  if (root.IsNull()) throw ConfigInvalid("<root>: empty document");
  check_keys(root, "",
             {"name", "seed", "duration_s", "tick_ms", "periods", "training_s", "thresholds", "wsn", "ipnet", "gps",
              "attacks", "probes", "collectors", "rules", "reaction"});
  ScenarioConfig cfg;
  if (root["name"]) cfg.name = str(root["name"], "name");
  if (root["seed"]) {
    cfg.seed = scalar<std::uint64_t>(root["seed"], "seed", "a non-negative integer");
  }
  if (root["duration_s"]) cfg.duration_us = positive_seconds(root["duration_s"], "duration_s");
  if (root["tick_ms"]) {
    cfg.tick_us = static_cast<TimeUs>(std::llround(num(root["tick_ms"], "tick_ms") * 1000.0));
    if (cfg.tick_us <= 0) bad("tick_ms", "must be positive");
  }
  if (const auto& p = root["periods"]) {
    check_keys(p, "periods", {"wsn_s", "app_window_s", "traffic_window_s", "gps_epoch_s"});
    if (p["wsn_s"]) cfg.wsn_period_us = positive_seconds(p["wsn_s"], "periods.wsn_s");
    if (p["app_window_s"]) cfg.app_window_us = positive_seconds(p["app_window_s"], "periods.app_window_s");
    if (p["traffic_window_s"]) {
      cfg.traffic_window_us = positive_seconds(p["traffic_window_s"], "periods.traffic_window_s");
    }
    if (p["gps_epoch_s"]) cfg.gps_epoch_us = positive_seconds(p["gps_epoch_s"], "periods.gps_epoch_s");
  }
  if (root["training_s"]) cfg.training_us = positive_seconds(root["training_s"], "training_s");
  if (const auto& t = root["thresholds"]) {
    check_keys(t, "thresholds", {"k", "gps_abs_dbhz", "gps_rel_dbhz", "gps_flat_variance", "gps_allowed_churn"});
    if (t["k"]) {
      cfg.k = num(t["k"], "thresholds.k");
      if (cfg.k < 0) bad("thresholds.k", "must not be negative");
    }
    if (t["gps_abs_dbhz"]) cfg.gps_probe.abs_threshold_dbhz = num(t["gps_abs_dbhz"], "thresholds.gps_abs_dbhz");
    if (t["gps_rel_dbhz"]) cfg.gps_probe.rel_threshold_dbhz = num(t["gps_rel_dbhz"], "thresholds.gps_rel_dbhz");
    if (t["gps_flat_variance"]) {
      cfg.gps_probe.flat_variance_floor = num(t["gps_flat_variance"], "thresholds.gps_flat_variance");
    }
    if (t["gps_allowed_churn"]) {
      cfg.gps_probe.allowed_churn = static_cast<int>(integer(t["gps_allowed_churn"], "thresholds.gps_allowed_churn"));
      if (cfg.gps_probe.allowed_churn < 0) bad("thresholds.gps_allowed_churn", "must not be negative");
    }
  }
  if (root["wsn"]) parse_wsn(root["wsn"], "wsn", cfg);
  if (root["ipnet"]) parse_ipnet(root["ipnet"], "ipnet", cfg);
  if (root["gps"]) parse_gps(root["gps"], "gps", cfg);
  if (cfg.gps) cfg.gps->epoch_us = cfg.gps_epoch_us;
  if (root["attacks"] && !root["attacks"].IsNull()) parse_attacks(root["attacks"], "attacks", cfg);
  if (const auto& p = root["probes"]) {
    check_keys(p, "probes", {"wsn", "app", "traffic", "host", "gps"});
    if (p["wsn"]) cfg.probes.wsn = boolean(p["wsn"], "probes.wsn");
    if (p["app"]) cfg.probes.app = boolean(p["app"], "probes.app");
    if (p["traffic"]) cfg.probes.traffic = boolean(p["traffic"], "probes.traffic");
    if (p["host"]) cfg.probes.host = boolean(p["host"], "probes.host");
    if (p["gps"]) cfg.probes.gps = boolean(p["gps"], "probes.gps");
  }
  if (const auto& c = root["collectors"]) {
    check_keys(c, "collectors", {"wsn", "app", "traffic", "host", "gps"});
    if (c["wsn"]) cfg.collectors.wsn = parse_collector(c["wsn"], "collectors.wsn");
    if (c["app"]) cfg.collectors.app = parse_collector(c["app"], "collectors.app");
    if (c["traffic"]) cfg.collectors.traffic = parse_collector(c["traffic"], "collectors.traffic");
    if (c["host"]) cfg.collectors.host = parse_collector(c["host"], "collectors.host");
    if (c["gps"]) cfg.collectors.gps = parse_collector(c["gps"], "collectors.gps");
  }
  if (root["rules"]) {
    cfg.rules = parse_rule_list(root["rules"], "rules");
  } else {
    cfg.rules = {default_sleep_deprivation_rule(cfg.wsn_period_us), default_syn_flood_rule(cfg.traffic_window_us),
                 default_gps_spoof_rule(cfg.gps_epoch_us)};
  }
  if (const auto& r = root["reaction"]) {
    check_keys(r, "reaction", {"enabled", "catalog"});
    if (r["enabled"]) cfg.reaction_enabled = boolean(r["enabled"], "reaction.enabled");
    if (r["catalog"]) cfg.catalog = parse_catalog(r["catalog"], "reaction.catalog");
  }
  validate_scenario(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(slurp(path)); }

void validate_scenario(const ScenarioConfig& cfg) {
  if (cfg.tick_us <= 0) bad("tick_ms", "must be positive");
  if (cfg.duration_us <= 0) bad("duration_s", "must be positive");
  check_divides(cfg.tick_us, cfg.duration_us, "duration_s");
  check_divides(cfg.tick_us, cfg.training_us, "training_s");
  check_divides(cfg.tick_us, cfg.wsn_period_us, "periods.wsn_s");
  check_divides(cfg.tick_us, cfg.app_window_us, "periods.app_window_s");
  check_divides(cfg.tick_us, cfg.traffic_window_us, "periods.traffic_window_s");
  check_divides(cfg.tick_us, cfg.gps_epoch_us, "periods.gps_epoch_s");
  if (cfg.training_us < cfg.wsn_period_us) bad("training_s", "must cover at least one WSN reporting period");

  const std::pair<const char*, const CollectorConfig*> collectors[] = {
      {"collectors.wsn", &cfg.collectors.wsn},         {"collectors.app", &cfg.collectors.app},
      {"collectors.traffic", &cfg.collectors.traffic}, {"collectors.host", &cfg.collectors.host},
      {"collectors.gps", &cfg.collectors.gps}};
  for (const auto& [path, c] : collectors) {
    try {
      validate(*c);
    } catch (const Error& e) {
      bad(path, e.what());
    }
    if (c->mode == CollectMode::Pull) {
      check_divides(cfg.tick_us, c->pull_period_us, sub(path, "period_s"));
      // A pulled record may wait one period; beyond the store's reorder
      // tolerance it would be rejected as out of order.
      if (c->pull_period_us > kDefaultReorderToleranceUs) {
        bad(sub(path, "period_s"), "must not exceed the store's reorder tolerance (2 s)");
      }
    }
  }

  if (cfg.wsn) {
    std::optional<WsnSim> sim;
    try {
      sim.emplace(*cfg.wsn, cfg.seed);
    } catch (const Error& e) {
      bad("wsn", e.what());
    }
    for (std::size_t i = 0; i < cfg.wsn->loop_nodes.size(); ++i) {
      const auto& id = cfg.wsn->loop_nodes[i];
      if (!sim->has_node(id) || id == cfg.wsn->base_station) {
        bad(idx("wsn.loop_nodes", i), "unknown node '" + id + "'");
      }
    }
  }
  if (cfg.wsn_attack) {
    const auto& a = *cfg.wsn_attack;
    if (!cfg.wsn) bad(attack_path(cfg, "sleep_deprivation", "kind"), "needs a wsn section");
    WsnSim sim(*cfg.wsn, cfg.seed);
    if (!sim.has_node(a.attacker_node) || a.attacker_node == cfg.wsn->base_station) {
      bad(attack_path(cfg, "sleep_deprivation", "attacker"), "unknown node '" + a.attacker_node + "'");
    }
    if (a.mode == WsnAttackMode::ForgedRrepLoop && cfg.wsn->loop_nodes.size() < 2) {
      bad("wsn.loop_nodes", "the forged_rrep_loop mode needs at least two loop nodes");
    }
    if (a.stop_us <= a.start_us) bad(attack_path(cfg, "sleep_deprivation", "stop_s"), "must be after start_s");
  }

  std::optional<IpNetSim> net;
  if (cfg.ipnet) {
    try {
      net.emplace(*cfg.ipnet);
    } catch (const Error& e) {
      bad("ipnet", e.what());
    }
    for (std::size_t i = 0; i < cfg.traffic_probe_routers.size(); ++i) {
      const auto& r = cfg.traffic_probe_routers[i];
      if (!net->routers().count(r)) bad(idx("ipnet.traffic_probe_routers", i), "unknown router '" + r + "'");
    }
  }
  if (cfg.ddos) {
    const auto& d = *cfg.ddos;
    if (!net) bad(attack_path(cfg, "syn_flood", "kind"), "needs an ipnet section");
    auto is_host = [&](const std::string& h) {
      return std::any_of(cfg.ipnet->hosts.begin(), cfg.ipnet->hosts.end(),
                         [&](const auto& p) { return p.first == h; });
    };
    if (!is_host(d.master_id)) bad(attack_path(cfg, "syn_flood", "master"), "unknown host '" + d.master_id + "'");
    for (const auto& agent : d.agent_ids) {
      if (!is_host(agent)) bad(attack_path(cfg, "syn_flood", "agents"), "unknown host '" + agent + "'");
    }
    if (!net->servers().count(d.target_server)) {
      bad(attack_path(cfg, "syn_flood", "target"), "unknown server '" + d.target_server + "'");
    }
    if (d.stop_us <= d.start_us) bad(attack_path(cfg, "syn_flood", "stop_s"), "must be after start_s");
  }
  if (cfg.gps) {
    try {
      GpsSim sim(*cfg.gps, cfg.seed);
    } catch (const Error& e) {
      bad("gps", e.what());
    }
  }
  if (cfg.spoof) {
    const auto& s = *cfg.spoof;
    if (!cfg.gps) bad(attack_path(cfg, "gps_spoof", "kind"), "needs a gps section");
    const auto& rx = cfg.gps->receivers;
    if (std::find(rx.begin(), rx.end(), s.target_receiver) == rx.end()) {
      bad(attack_path(cfg, "gps_spoof", "target"), "unknown receiver '" + s.target_receiver + "'");
    }
    if (s.stop_us <= s.start_us) bad(attack_path(cfg, "gps_spoof", "stop_s"), "must be after start_s");
  }

  std::set<std::string> ids;
  for (std::size_t i = 0; i < cfg.rules.size(); ++i) {
    try {
      validate_rule(cfg.rules[i]);
    } catch (const InvalidRule& e) {
      bad(idx("rules", i), e.what());
    }
    if (!ids.insert(cfg.rules[i].rule_id).second) bad(sub(idx("rules", i), "id"), "duplicate rule id");
  }
  try {
    validate_catalog(cfg.catalog);
  } catch (const Error& e) {
    bad("reaction.catalog", e.what());
  }
}

std::vector<CorrelationRule> parse_rules(const std::string& yaml_text) {
  const YAML::Node root = load_yaml(yaml_text);
  if (root.IsSequence()) return parse_rule_list(root, "rules");
  if (root.IsMap() && root["rules"]) return parse_rule_list(root["rules"], "rules");
  // A whole scenario file: its defaults follow its probe periods.
  if (root.IsMap()) return parse_scenario(yaml_text).rules;
  return default_rules();
}

std::vector<CorrelationRule> load_rules(const std::string& path) { return parse_rules(slurp(path)); }

}  // namespace gridsiem
