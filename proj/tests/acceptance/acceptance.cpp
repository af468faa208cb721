// Runs the nine acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "gridsiem/disjoint_paths.hpp"
#include "gridsiem/errors.hpp"
#include "gridsiem/ipnet.hpp"
#include "gridsiem/runner.hpp"
#include "gridsiem/scenario.hpp"
#include "oracles.hpp"

using namespace gridsiem;
namespace fs = std::filesystem;

namespace {

constexpr TimeUs S = kUsPerSecond;
constexpr std::uint64_t kAltSeed = 20261016;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

// Seed override shared by every run of one evaluation pass.
struct Pass {
  std::optional<std::uint64_t> seed;
  bool base() const { return !seed; }
};

ScenarioConfig scenario(const std::string& name) { return load_scenario(oracle::scenario(name).string()); }

RunResult run_named(const std::string& name, const Pass& pass, bool no_reaction = false,
                    std::optional<TimeUs> duration = std::nullopt) {
  RunOptions o;
  o.seed = pass.seed;
  o.no_reaction = no_reaction;
  o.duration_us = duration;
  return run(scenario(name), o);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string secs(TimeUs t) { return fmt(static_cast<double>(t) / S) + "s"; }

// ---------------------------------------------------------------------------

Outcome criterion1(const Pass& pass) {
  Outcome out;
  for (const auto* name : {"sleep_deprivation.broadcast", "sleep_deprivation.rreq", "sleep_deprivation.loop"}) {
    const auto cfg = scenario(name);
    const auto r = run_named(name, pass);
    std::vector<const IncidentRow*> sleep;
    for (const auto& row : r.report.incidents) {
      if (row.incident.kind == IncidentKind::SleepDeprivation) sleep.push_back(&row);
    }
    out.check(sleep.size() == 1, std::string(name) + ": " + std::to_string(sleep.size()) + " incidents");
    if (sleep.size() != 1) continue;
    const auto& inc = sleep[0]->incident;
    out.check(inc.culprit == cfg.wsn_attack->attacker_node,
              std::string(name) + ": culprit " + inc.culprit.value_or("-"));
    const TimeUs latency = inc.window_end_us - cfg.wsn_attack->start_us;
    out.check(latency >= 0 && latency <= 2 * cfg.wsn_period_us, std::string(name) + ": latency " + secs(latency));
    out.note(std::string(name) + " latency " + secs(latency));
  }
  const auto benign = run_named("benign", pass);
  out.check(benign.report.incidents.empty(), "benign incidents");
  out.check(benign.alerts.empty(), "benign alerts " + std::to_string(benign.alerts.size()));
  out.check(benign.report.alarm_counts.at("probe_alarms") == 0 && benign.report.alarm_counts.at("probe_warnings") == 0,
            "benign probe alarms");
  out.check(benign.report.duration_us >= 300 * S, "benign duration");
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion2(const Pass& pass) {
  Outcome out;
  for (const auto* name : {"sleep_deprivation.broadcast", "sleep_deprivation.rreq", "sleep_deprivation.loop"}) {
    const auto cfg = scenario(name);
    const auto& attacker = cfg.wsn_attack->attacker_node;
    const auto& bs = cfg.wsn->base_station;
    // Without reactions the attack keeps running, so both effects show in full.
    const auto r = run_named(name, pass, true);
    std::map<std::string, const NodeRow*> rows;
    for (const auto& n : r.report.wsn_nodes) rows[n.node_id] = &n;
    if (!rows.count(attacker)) {
      out.check(false, std::string(name) + ": attacker row missing");
      continue;
    }

    std::set<std::string> on_path(rows[attacker]->route_at_onset.begin(), rows[attacker]->route_at_onset.end());
    if (cfg.wsn_attack->mode == WsnAttackMode::ForgedRrepLoop) {
      on_path.insert(cfg.wsn->loop_nodes.begin(), cfg.wsn->loop_nodes.end());
    }
    on_path.erase(attacker);
    on_path.erase(bs);

    double min_on = INFINITY, max_off = -INFINITY;
    std::string min_on_id, max_off_id;
    std::int64_t cross_orig = 0, cross_drop = 0, disj_orig = 0, disj_drop = 0;
    for (const auto& [id, n] : rows) {
      if (id == attacker || id == bs) continue;
      if (on_path.count(id)) {
        if (n->drain_total < min_on) min_on = n->drain_total, min_on_id = id;
      } else if (n->drain_total > max_off) {
        max_off = n->drain_total, max_off_id = id;
      }
      const bool crossing = std::any_of(n->route_at_onset.begin(), n->route_at_onset.end(),
                                        [&](const std::string& hop) { return on_path.count(hop) != 0; });
      (crossing ? cross_orig : disj_orig) += n->data_originated_attack;
      (crossing ? cross_drop : disj_drop) += n->data_dropped_attack;
    }
    const double cross_loss = cross_orig ? static_cast<double>(cross_drop) / cross_orig : 0.0;
    const double disj_loss = disj_orig ? static_cast<double>(disj_drop) / disj_orig : 0.0;
    out.check(!on_path.empty() && min_on > max_off,
              std::string(name) + ": drain on-path min " + fmt(min_on) + " vs off-path max " + fmt(max_off));
    out.check(cross_orig > 0 && disj_orig > 0 && cross_loss > disj_loss,
              std::string(name) + ": loss crossing " + fmt(cross_loss) + " vs disjoint " + fmt(disj_loss));
    out.note(std::string(name) + " drain " + min_on_id + "=" + fmt(min_on) + ">" + max_off_id + "=" + fmt(max_off) +
             " loss " + fmt(cross_loss) + ">" + fmt(disj_loss));
  }
  return out;
}

// ---------------------------------------------------------------------------

// SYN rate reaching the target: the DDoS aggregate thinned by proportional
// sharing at every router of its route.
double effective_syn_rate(const ScenarioConfig& cfg) {
  IpNetSim net(*cfg.ipnet);
  const auto& d = *cfg.ddos;
  const double attack = d.syn_rate_per_agent_pps * static_cast<double>(d.agent_ids.size());
  const auto route = compute_disjoint_paths(net.topology(), net.router_of(*d.agent_ids.begin()),
                                            net.server(d.target_server).router, 1)
                         .front();
  double rate = attack;
  for (const auto& hop : route) {
    double offered = attack;
    for (const auto& f : net.flows()) {
      for (const auto& p : f.paths) {
        if (p.enabled && std::count(p.routers.begin(), p.routers.end(), hop)) offered += f.rate_pps * p.weight;
      }
    }
    rate = std::min(rate, attack * std::min(1.0, net.router(hop).capacity_pps / offered));
  }
  return rate;
}

Outcome criterion3(const Pass& pass) {
  Outcome out;
  const std::vector<std::pair<std::string, std::optional<Confidence>>> matrix = {
      {"synflood.shared_router", Confidence::High},
      {"synflood.traffic_only", Confidence::Medium},
      {"benign", std::nullopt}};
  for (const auto& [name, want] : matrix) {
    const auto r = run_named(name, pass);
    std::vector<Confidence> got;
    for (const auto& row : r.report.incidents) {
      if (row.incident.kind == IncidentKind::SynFlood) got.push_back(row.incident.confidence);
    }
    if (want) {
      out.check(got.size() == 1 && got[0] == *want, name + ": expected one " + std::string(to_string(*want)));
    } else {
      out.check(got.empty(), name + ": expected no SynFlood incident");
    }
    out.note(name + " -> " + (got.empty() ? "absent" : std::string(to_string(got[0]))));
  }

  const auto cfg = scenario("synflood.shared_router");
  const auto r = run_named("synflood.shared_router", pass, true);
  const auto& target = cfg.ddos->target_server;
  const auto spec = std::find_if(cfg.ipnet->servers.begin(), cfg.ipnet->servers.end(),
                                 [&](const IpServerSpec& s) { return s.id == target; });
  const auto row = std::find_if(r.report.servers.begin(), r.report.servers.end(),
                                [&](const ServerRow& s) { return s.server_id == target; });
  if (spec == cfg.ipnet->servers.end() || row == r.report.servers.end() || !row->first_saturated_us) {
    out.check(false, "target never saturated");
    return out;
  }
  const double model = oracle::fill_time_s(static_cast<double>(spec->half_open_capacity), effective_syn_rate(cfg),
                                           static_cast<double>(spec->syn_timeout_us) / S);
  const double observed = static_cast<double>(*row->first_saturated_us - cfg.ddos->start_us) / S;
  const double tol = static_cast<double>(cfg.traffic_window_us) / S;
  out.check(std::abs(observed - model) <= tol,
            "saturation after " + fmt(observed) + "s vs model " + fmt(model) + "s");
  out.note("saturation " + fmt(observed) + "s, model " + fmt(model) + "s, tolerance " + fmt(tol) + "s");
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion4(const Pass& pass) {
  Outcome out;
  const auto cfg = scenario("synflood.shared_router");
  const TimeUs start = cfg.ddos->start_us, stop = cfg.ddos->stop_us;

  const auto open = run_named("synflood.shared_router", pass, true);
  double worst = 1.0;
  for (const auto& d : open.report.monitoring) {
    if (d.t_end_us > start && d.t_end_us - cfg.traffic_window_us < stop) worst = std::min(worst, d.ratio);
  }
  out.check(worst < 0.8, "unmitigated worst window ratio " + fmt(worst));

  const auto fixed = run_named("synflood.shared_router", pass);
  std::optional<TimeUs> applied;
  for (const auto& row : fixed.report.reactions) {
    for (const auto& s : row.steps) {
      if (s.action == "DisablePathAndReroute" && s.verdict != "NotAttempted" && s.applied_us) applied = s.applied_us;
    }
  }
  if (!applied) {
    out.check(false, "no re-route applied");
    return out;
  }
  const TimeUs deadline = *applied + 2 * cfg.traffic_window_us;
  std::optional<TimeUs> recovered;
  bool stays = true;
  for (const auto& d : fixed.report.monitoring) {
    if (d.t_end_us <= *applied) continue;
    if (!recovered && d.ratio >= 0.99) recovered = d.t_end_us;
    if (recovered && d.ratio < 0.99) stays = false;
  }
  out.check(recovered && *recovered <= deadline, "recovery by " + secs(deadline));
  out.check(stays, "ratio dips again after recovery");

  // Disabled paths stay frozen from the first window that ends after the change.
  std::map<std::string, std::int64_t> frozen;
  bool leak = false;
  std::size_t disabled_seen = 0;
  for (const auto& d : fixed.report.monitoring) {
    if (d.t_end_us < *applied + cfg.tick_us) continue;
    for (const auto& p : d.paths) {
      if (p.enabled) continue;
      const auto key = d.flow_id + "/" + p.routers;
      if (!frozen.count(key)) {
        frozen[key] = p.injected;
        ++disabled_seen;
      } else if (frozen[key] != p.injected) {
        leak = true;
      }
    }
  }
  out.check(disabled_seen > 0 && !leak, "packets on the disabled path after the re-route");
  out.note("worst " + fmt(worst) + ", applied " + secs(*applied) + ", recovered " +
           (recovered ? secs(*recovered) : std::string("never")));
  return out;
}

// ---------------------------------------------------------------------------

const std::set<std::string> kDefaultGpsTypes = {"gps_abs_alarm", "gps_rel_alarm", "gps_persat_alarm"};

// Receivers' incident times predicted from the raw probe events: the vote
// holds at t when at least two distinct default techniques alarmed in
// (t - W, t]; a new incident starts whenever the previous holding time is
// more than W back.
std::vector<std::pair<TimeUs, std::string>> predicted_gps_incidents(const std::vector<NormalizedEvent>& log,
                                                                     TimeUs window) {
  std::set<TimeUs> times;
  std::vector<const NormalizedEvent*> alarms;
  for (const auto& e : log) {
    if (e.source_kind != SourceKind::Engine) times.insert(e.ts_us);
    if (kDefaultGpsTypes.count(e.event_type)) alarms.push_back(&e);
  }
  std::map<std::string, TimeUs> last_true;
  std::vector<std::pair<TimeUs, std::string>> out;
  for (const TimeUs t : times) {
    std::map<std::string, std::set<std::string>> votes;
    for (const auto* a : alarms) {
      if (a->ts_us > t - window && a->ts_us <= t) votes[a->get_string("receiver_id")].insert(a->event_type);
    }
    for (const auto& [rx, kinds] : votes) {
      if (kinds.size() < 2) continue;
      const auto it = last_true.find(rx);
      if (it == last_true.end() || t - it->second > window) out.emplace_back(t, rx);
      last_true[rx] = t;
    }
  }
  return out;
}

Outcome criterion5(const Pass& pass) {
  Outcome out;
  struct Case {
    std::string name;
    std::function<bool(const NormalizedEvent&)> designed;
    std::string label;
  };
  const std::vector<std::vector<Case>> groups = {
      {{"gps.override", [](const NormalizedEvent& e) { return e.event_type == "gps_abs_alarm"; }, "abs"},
       {"gps.override", [](const NormalizedEvent& e) { return e.event_type == "gps_rel_alarm"; }, "rel"}},
      {{"gps.tooperfect",
        [](const NormalizedEvent& e) {
          return e.event_type == "gps_persat_alarm" && e.get_string("test") == "flat";
        },
        "persat/flat"}},
      {{"gps.constswap", [](const NormalizedEvent& e) { return e.event_type == "gps_const_alarm"; }, "const"}}};
  for (const auto& group : groups) {
    const auto& name = group.front().name;
    const auto cfg = scenario(name);
    const auto r = run_named(name, pass, true);
    for (const auto& c : group) {
      const bool tripped = std::any_of(r.log.begin(), r.log.end(), [&](const NormalizedEvent& e) {
        return e.ts_us == cfg.spoof->start_us && e.attrs.count("receiver_id") &&
               e.get_string("receiver_id") == cfg.spoof->target_receiver && c.designed(e);
      });
      out.check(tripped, name + ": " + c.label + " not raised on the onset epoch");
    }

    const auto predicted = predicted_gps_incidents(r.log, 3 * cfg.gps_epoch_us);
    std::vector<std::pair<TimeUs, std::string>> actual;
    for (const auto& row : r.report.incidents) {
      if (row.incident.kind == IncidentKind::GpsSpoof) {
        actual.emplace_back(row.incident.window_end_us, row.incident.culprit.value_or("-"));
      }
    }
    out.check(predicted == actual, name + ": incidents differ from the 2-of-3 vote");
    out.note(name + " incidents " + std::to_string(actual.size()));
  }

  const auto benign = run_named("benign", pass, true, 1000 * scenario("benign").gps_epoch_us);
  std::int64_t default_alarms = 0, const_alarms = 0;
  for (const auto& e : benign.log) {
    default_alarms += kDefaultGpsTypes.count(e.event_type);
    const_alarms += e.event_type == "gps_const_alarm";
  }
  out.check(default_alarms == 0, "benign 1000 epochs: " + std::to_string(default_alarms) + " default-probe alarms");
  out.check(benign.report.incidents.empty(), "benign 1000 epochs: incidents");
  out.note("benign 1000 epochs: default-probe alarms " + std::to_string(default_alarms) +
           ", constellation alarms " + std::to_string(const_alarms));
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion6(const Pass& pass) {
  Outcome out;
  const auto dir = fs::temp_directory_path() / "gridsiem_acceptance";
  fs::create_directories(dir);
  std::size_t total = 0;
  for (const auto& path : oracle::all_scenarios()) {
    const auto name = path.stem().string();
    const auto cfg = load_scenario(path.string());
    RunOptions o;
    o.seed = pass.seed;
    o.log_path = dir / (name + ".log");
    const auto r = run(cfg, o);
    std::vector<Incident> live;
    for (const auto& row : r.report.incidents) live.push_back(row.incident);
    total += live.size();
    out.check(oracle::brute_force_incidents(r.log, cfg.rules) == live, name + ": engine vs brute force");
    const auto replayed = replay_file(*o.log_path, cfg.rules);
    std::vector<Incident> again;
    for (const auto& row : replayed.incidents) again.push_back(row.incident);
    out.check(again == live, name + ": replay vs live");
    fs::remove(*o.log_path);
  }
  out.note(std::to_string(oracle::all_scenarios().size()) + " scenarios, " + std::to_string(total) + " incidents");
  return out;
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion7_identical(double& slowest_s, std::string& slowest) {
  Outcome out;
  const auto dir = fs::temp_directory_path() / "gridsiem_acceptance_det";
  fs::create_directories(dir);
  for (const auto& path : oracle::all_scenarios()) {
    const auto name = path.stem().string();
    std::string logs[2], reports[2];
    for (int i = 0; i < 2; ++i) {
      RunOptions o;
      o.log_path = dir / (name + "." + std::to_string(i) + ".log");
      const auto t0 = std::chrono::steady_clock::now();
      const auto r = run(load_scenario(path.string()), o);
      const double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (took > slowest_s) slowest_s = took, slowest = name;
      logs[i] = slurp(*o.log_path);
      reports[i] = render_machine(r.report);
      fs::remove(*o.log_path);
    }
    out.check(!logs[0].empty() && logs[0] == logs[1], name + ": event logs differ");
    out.check(reports[0] == reports[1], name + ": machine reports differ");
  }
  out.check(slowest_s < 10.0, "slowest scenario " + slowest + " took " + fmt(slowest_s) + "s");
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion8() {
  Outcome out;
  IpNetSim net(ipnet_fixture_config());
  const auto& topo = net.topology();
  const auto paths = compute_disjoint_paths(topo, "r1", "r6", 2);
  std::vector<std::vector<Path>> best;
  const auto cost = oracle::best_disjoint_cost(topo, "r1", "r6", 2, &best);
  std::size_t got_cost = 0;
  for (const auto& p : paths) got_cost += p.size() - 1;
  out.check(cost && got_cost == *cost, "total hops " + std::to_string(got_cost));
  out.check(std::find(best.begin(), best.end(), paths) != best.end(), "result is not an optimal choice");
  const std::vector<Path> corridors = {{"r1", "r2", "r3", "r6"}, {"r1", "r4", "r5", "r6"}};
  out.check(paths == corridors, "corridors differ from r1-r2-r3-r6 / r1-r4-r5-r6");

  const auto cut = oracle::min_vertex_cut(topo, "r1", "r6");
  out.check(cut == 2u, "min vertex cut");
  bool threw = false;
  try {
    compute_disjoint_paths(topo, "r1", "r6", static_cast<int>(cut.value_or(0)) + 1);
  } catch (const InsufficientDisjointness&) {
    threw = true;
  }
  out.check(threw, "k = cut + 1 did not throw InsufficientDisjointness");
  std::string shown;
  for (const auto& p : paths) {
    std::string s;
    for (const auto& r : p) s += (s.empty() ? "" : "-") + r;
    shown += (shown.empty() ? "" : " / ") + s;
  }
  out.note(shown + ", cut " + std::to_string(cut.value_or(0)) + ", " + std::to_string(best.size()) +
           " optimal choice(s)");
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion9(const Pass& pass) {
  Outcome out;
  const std::vector<std::string> order = {"reprogram", "sleep", "isolate"};
  const auto catalog = default_catalog().at(IncidentKind::SleepDeprivation);
  std::vector<std::string> catalog_order;
  for (const auto& s : catalog) catalog_order.push_back(s.strategy_id);
  out.check(catalog_order == order, "catalog order");

  for (const auto& path : oracle::all_scenarios()) {
    const auto name = path.stem().string();
    RunOptions o;
    o.seed = pass.seed;
    const auto r = run(load_scenario(path.string()), o);
    for (const auto& row : r.report.reactions) {
      if (row.kind != "SleepDeprivation") continue;
      std::vector<std::string> strategies;
      for (const auto& s : row.steps) strategies.push_back(s.strategy);
      out.check(strategies == order, name + ": step order");
      bool gap = false, stopped = false;
      for (const auto& s : row.steps) {
        const bool attempted = s.verdict != "NotAttempted";
        out.check(!(attempted && (gap || stopped)), name + ": attempted steps are not a prefix ending at Stopped");
        gap = gap || !attempted;
        stopped = stopped || s.verdict == "Stopped";
      }
    }
  }

  if (pass.base()) {
    // The bundled seed makes the reprogram draw fail.
    const auto r = run_named("sleep_deprivation.reprogram_fails", pass);
    if (r.report.reactions.size() != 1 || r.report.reactions[0].steps.size() != 3) {
      out.check(false, "reprogram_fails: expected one three-step plan");
      return out;
    }
    const auto& steps = r.report.reactions[0].steps;
    out.check(steps[0].verdict == "Failed", "reprogram_fails: reprogram " + steps[0].verdict);
    out.check(steps[1].verdict == "Stopped", "reprogram_fails: sleep " + steps[1].verdict);
    out.check(steps[2].verdict == "NotAttempted", "reprogram_fails: isolate " + steps[2].verdict);
    out.note("reprogram " + steps[0].verdict + ", sleep " + steps[1].verdict + ", isolate " + steps[2].verdict);
  } else {
    out.note("alternate seed: order and prefix checks only");
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

namespace {

using Criterion = std::function<Outcome(const Pass&)>;

Outcome guarded(const Criterion& c, const Pass& pass) {
  try {
    return c(pass);
  } catch (const std::exception& e) {
    Outcome o;
    o.check(false, std::string("exception: ") + e.what());
    return o;
  }
}

void print(int id, const std::string& title, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << title;
  for (const auto& n : o.notes) std::cout << "\n        " << n;
  std::cout << '\n';
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Criterion>> criteria = {
      {"sleep-deprivation detection", criterion1},
      {"drain and data-loss effects", criterion2},
      {"SYN-flood confidence and saturation time", criterion3},
      {"re-route efficacy", criterion4},
      {"GPS voting", criterion5},
      {"engine oracle equivalence and replay", criterion6},
      {"determinism", nullptr},
      {"disjoint-path correctness", [](const Pass&) { return criterion8(); }},
      {"sequential reaction semantics", criterion9}};

  const Pass base{}, alt{kAltSeed};
  std::vector<Outcome> at_base(criteria.size()), at_alt(criteria.size());
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!criteria[i].second) continue;
    at_base[i] = guarded(criteria[i].second, base);
    at_alt[i] = guarded(criteria[i].second, alt);
  }

  double slowest_s = 0;
  std::string slowest;
  Outcome det;
  try {
    det = criterion7_identical(slowest_s, slowest);
  } catch (const std::exception& e) {
    det.check(false, std::string("exception: ") + e.what());
  }
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!criteria[i].second) continue;
    det.check(at_base[i].pass == at_alt[i].pass,
              "criterion " + std::to_string(i + 1) + " verdict changes with seed " + std::to_string(kAltSeed));
  }
  det.note("slowest scenario " + slowest + " " + fmt(slowest_s) + "s; verdicts rechecked with seed " +
           std::to_string(kAltSeed));
  at_base[6] = det;

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    print(static_cast<int>(i + 1), criteria[i].first, at_base[i]);
    if (i != 6 && !at_alt[i].pass) {
      for (const auto& n : at_alt[i].notes) std::cout << "        [seed " << kAltSeed << "] " << n << '\n';
    }
    all = all && at_base[i].pass;
  }
  return all ? 0 : 1;
}
