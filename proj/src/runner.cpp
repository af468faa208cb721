#include "gridsiem/runner.hpp"

#include <algorithm>
#include <limits>

#include "gridsiem/collect.hpp"
#include "gridsiem/errors.hpp"
#include "gridsiem/normalize.hpp"
#include "gridsiem/store.hpp"

namespace gridsiem {

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

double seconds_of(TimeUs us) { return static_cast<double>(us) / static_cast<double>(kUsPerSecond); }

NormalizedEvent sim_event(const SimEvent& s) {
  NormalizedEvent e;
  e.ts_us = s.ts_us;
  e.source_id = s.source_id;
  e.source_kind = SourceKind::Simulator;
  e.event_type = s.event_type;
  e.severity = s.severity;
  e.attrs = s.attrs;
  return e;
}

NormalizedEvent profile_event(const ThresholdProfile& p) {
  NormalizedEvent e;
  e.ts_us = 0;
  e.source_id = "trainer";
  e.source_kind = SourceKind::Engine;
  e.event_type = "threshold_profile";
  e.attrs = {{"signal", p.signal_name}, {"mean", p.mean}, {"stddev", p.stddev}, {"k", p.k}, {"threshold", p.threshold}};
  return e;
}

bool is_probe(SourceKind k) { return k != SourceKind::Simulator && k != SourceKind::Engine; }

AttackTruth truth(std::string kind, std::string mode, std::string target, TimeUs start, TimeUs stop) {
  AttackTruth t;
  t.kind = std::move(kind);
  t.mode = std::move(mode);
  t.target = std::move(target);
  t.start_us = start;
  t.stop_us = stop;
  return t;
}

// Engine feeding shared by the live run and replay: one ingest per distinct
// timestamp, engine-kind events skipped.
class EngineFeed {
 public:
  explicit EngineFeed(const std::vector<CorrelationRule>& rules) {
    for (const auto& r : rules) engine_.register_rule(r);
  }

  template <class At>
  Engine::Output pump(std::size_t size, At at, TimeUs cutoff_exclusive) {
    Engine::Output out;
    while (cursor_ < size) {
      const TimeUs ts = at(cursor_).ts_us;
      if (ts >= cutoff_exclusive) break;
      std::vector<NormalizedEvent> group;
      while (cursor_ < size && at(cursor_).ts_us == ts) {
        const auto& e = at(cursor_);
        if (e.source_kind != SourceKind::Engine) group.push_back(e);
        ++cursor_;
      }
      if (group.empty()) continue;
      auto o = engine_.ingest(group);
      out.alerts.insert(out.alerts.end(), o.alerts.begin(), o.alerts.end());
      out.incidents.insert(out.incidents.end(), o.incidents.begin(), o.incidents.end());
    }
    return out;
  }

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  std::size_t cursor_ = 0;
};

// Cumulative per-tick series the reaction verifier and the report read.
struct Series {
  TimeUs tick_us = 0;
  std::vector<std::int64_t> wsn_arrivals{0};
  std::vector<std::int64_t> mon_offered{0};
  std::vector<std::int64_t> mon_delivered{0};
  // epoch end -> receiver -> largest discrepancy involving it
  std::map<TimeUs, std::map<std::string, double>> gps_disc;

  std::size_t at(TimeUs t) const { return static_cast<std::size_t>(std::max<TimeUs>(t, 0) / tick_us); }

  double arrival_rate(TimeUs a, TimeUs b) const {
    a = std::max<TimeUs>(a, 0);
    if (b <= a) return 0;
    return static_cast<double>(wsn_arrivals[at(b)] - wsn_arrivals[at(a)]) / seconds_of(b - a);
  }

  double monitoring_loss(TimeUs a, TimeUs b) const {
    a = std::max<TimeUs>(a, 0);
    const auto off = mon_offered[at(b)] - mon_offered[at(a)];
    const auto del = mon_delivered[at(b)] - mon_delivered[at(a)];
    if (off <= 0) return 0;
    return 1.0 - static_cast<double>(del) / static_cast<double>(off);
  }

  double gps_discrepancy(const std::string& rx, TimeUs a, TimeUs b) const {
    double worst = 0;
    for (auto it = gps_disc.upper_bound(a); it != gps_disc.end() && it->first <= b; ++it) {
      if (auto r = it->second.find(rx); r != it->second.end()) worst = std::max(worst, r->second);
    }
    return worst;
  }
};

struct SourceSlot {
  ProbeSource source;
  CollectorConfig collector;
  SourceRow stats;
};

struct PlanState {
  ReactionPlan plan;
  std::string culprit;
  TimeUs due_us = 0;
  bool verifying = false;
  std::size_t step = 0;
};

class Pipeline {
 public:
  Pipeline(const ScenarioConfig& cfg, bool training, std::map<std::string, ThresholdProfile> profiles,
           bool reaction_enabled)
      : cfg_(cfg),
        training_(training),
        reaction_enabled_(reaction_enabled && !training),
        gps_bank_(cfg.gps_probe),
        normalizer_(NormalizerContext{cfg.wsn_period_us, cfg.app_window_us, cfg.traffic_window_us, profiles}),
        profiles_(std::move(profiles)),
        feed_(cfg.rules),
        reaction_rng_(Rng::derived(cfg.seed, "reaction")) {
    series_.tick_us = cfg.tick_us;
    if (cfg.wsn) {
      wsn_.emplace(*cfg.wsn, cfg.seed);
      if (cfg.wsn_attack && !training) wsn_->inject_attack(*cfg.wsn_attack);
    }
    if (cfg.ipnet) {
      net_.emplace(*cfg.ipnet);
      if (cfg.ddos && !training) net_->launch_ddos(*cfg.ddos);
      traffic_routers_ = cfg.traffic_probe_routers;
      if (traffic_routers_.empty()) {
        for (const auto& [id, r] : net_->routers()) traffic_routers_.push_back(id);
      }
    }
    if (cfg.gps) {
      gps_.emplace(*cfg.gps, cfg.seed);
      if (cfg.spoof && !training) gps_->inject_spoof(*cfg.spoof);
    }
  }

  void set_log_path(const std::filesystem::path& p) { store_.persist_to(p); }

  void run() {
    if (!training_) {
      for (const auto& [name, p] : profiles_) store_.append(profile_event(p));
    }
    for (TimeUs t0 = 0; t0 < cfg_.duration_us; t0 += cfg_.tick_us) tick(t0, t0 + cfg_.tick_us);
    finish();
  }

  // Training outputs.
  std::map<std::string, std::vector<double>> samples;

  // Run outputs.
  EventStore store_;
  RunReport report;
  std::vector<Alert> alerts;
  std::string digest() const {
    std::string d;
    if (wsn_) d += "[wsn]\n" + wsn_->digest();
    if (net_) d += "[ipnet]\n" + net_->digest();
    if (gps_) d += "[gps]\n" + gps_->digest();
    return d;
  }

 private:
  void append(NormalizedEvent e) { store_.append(std::move(e)); }

  void sim(TimeUs ts, const std::string& source, const std::string& type, Attrs attrs,
           Severity sev = Severity::Info) {
    append(sim_event({ts, source, type, sev, std::move(attrs)}));
  }

  SourceSlot& slot(const std::string& id, SourceKind kind, const CollectorConfig& cc) {
    auto it = sources_.find(id);
    if (it == sources_.end()) {
      it = sources_.emplace(id, SourceSlot{ProbeSource(id, kind), cc, {}}).first;
      it->second.stats.source_id = id;
      it->second.stats.kind = std::string(to_string(kind));
    }
    return it->second;
  }

  void emit(const RawRecord& r, const CollectorConfig& cc) { slot(r.source_id, r.source_kind, cc).source.emit(r); }

  const ThresholdProfile* profile(const std::string& signal) const {
    auto it = profiles_.find(signal);
    return it == profiles_.end() ? nullptr : &it->second;
  }

  void tick(TimeUs t0, TimeUs t1) {
    if (reaction_enabled_) react(t0);
    attack_onsets(t0);

    if (wsn_) {
      const auto obs = wsn_->step(cfg_.tick_us);
      for (const auto& id : obs.died) sim(t1, "wsn", "wsn_node_died", {{"node_id", id}}, Severity::Warning);
      if (cfg_.wsn_attack && !training_ && !wsn_ended_ && wsn_->attack_ended_at()) {
        wsn_ended_ = true;
        sim(*wsn_->attack_ended_at(), "wsn", "attack_ended",
            {{"attack_kind", std::string(to_string(IncidentKind::SleepDeprivation))},
             {"reason", wsn_->attack_end_reason().value_or("stop_time")}});
        snapshot_wsn_end();
      }
      series_.wsn_arrivals.push_back(wsn_->server_arrivals());
    } else {
      series_.wsn_arrivals.push_back(0);
    }

    if (net_) {
      const auto obs = net_->step(cfg_.tick_us);
      for (const auto& e : obs.events) append(sim_event(e));
      if (cfg_.ddos && !training_ && !ddos_ended_ && t1 > cfg_.ddos->stop_us) {
        ddos_ended_ = true;
        sim(cfg_.ddos->stop_us, "ipnet", "attack_ended",
            {{"attack_kind", std::string(to_string(IncidentKind::SynFlood))}, {"reason", "stop_time"}});
      }
      std::int64_t off = 0, del = 0;
      for (const auto& f : net_->flows()) {
        if (f.kind != FlowKind::Monitoring) continue;
        off += f.offered;
        del += f.delivered;
      }
      series_.mon_offered.push_back(off);
      series_.mon_delivered.push_back(del);
    } else {
      series_.mon_offered.push_back(0);
      series_.mon_delivered.push_back(0);
    }

    std::vector<GpsSnapshot> snaps;
    if (gps_ && t1 % cfg_.gps_epoch_us == 0) {
      snaps = gps_->step();
      pdc_check(t1);
      if (cfg_.spoof && !training_ && !spoof_ended_ && t1 > cfg_.spoof->stop_us) {
        spoof_ended_ = true;
        sim(cfg_.spoof->stop_us, "gps", "attack_ended",
            {{"attack_kind", std::string(to_string(IncidentKind::GpsSpoof))}, {"reason", "stop_time"}});
      }
    }

    fire_probes(t1, snaps);
    collect_all(t1);
    store_.advance_watermark(t1);
    if (!training_) {
      drive_engine(t1, t1 - store_.reorder_tolerance(), true);
    }
  }

  void attack_onsets(TimeUs t0) {
    if (training_) return;
    if (cfg_.wsn_attack && !wsn_started_ && t0 >= cfg_.wsn_attack->start_us) {
      wsn_started_ = true;
      const auto& a = *cfg_.wsn_attack;
      sim(a.start_us, "wsn", "attack_injected",
          {{"attack_kind", std::string(to_string(IncidentKind::SleepDeprivation))},
           {"mode", std::string(to_string(a.mode))},
           {"target", a.attacker_node}});
      snapshot_wsn_start();
    }
    if (cfg_.ddos && !ddos_started_ && t0 >= cfg_.ddos->start_us) {
      ddos_started_ = true;
      sim(cfg_.ddos->start_us, "ipnet", "attack_injected",
          {{"attack_kind", std::string(to_string(IncidentKind::SynFlood))},
           {"mode", "syn_flood"},
           {"target", cfg_.ddos->target_server}});
    }
    if (cfg_.spoof && !spoof_started_ && t0 >= cfg_.spoof->start_us) {
      spoof_started_ = true;
      sim(cfg_.spoof->start_us, "gps", "attack_injected",
          {{"attack_kind", std::string(to_string(IncidentKind::GpsSpoof))},
           {"mode", std::string(to_string(cfg_.spoof->mode))},
           {"target", cfg_.spoof->target_receiver}});
    }
  }

  void pdc_check(TimeUs t) {
    std::vector<PmuReport> reports;
    for (const auto& [id, st] : gps_->receivers()) {
      try {
        reports.push_back({id, t, gps_->pmu_timestamp(id, t)});
      } catch (const NotLocked&) {
        // an unlocked PMU reports nothing this epoch
      }
    }
    auto& worst = series_.gps_disc[t];
    for (const auto& d : pdc_compare(reports)) {
      worst[d.pmu_a] = std::max(worst[d.pmu_a], d.discrepancy_us);
      worst[d.pmu_b] = std::max(worst[d.pmu_b], d.discrepancy_us);
      if (d.discrepancy_us == 0 || training_) continue;
      const bool tainted = gps_->receiver(d.pmu_a).holdover || gps_->receiver(d.pmu_b).holdover;
      sim(t, "pdc", "pdc_discrepancy",
          {{"pmu_a", d.pmu_a}, {"pmu_b", d.pmu_b}, {"discrepancy_us", d.discrepancy_us},
           {"tainted", std::int64_t{tainted}}},
          Severity::Warning);
    }
  }

  void fire_probes(TimeUs t1, const std::vector<GpsSnapshot>& snaps) {
    const auto& p = cfg_.probes;
    if (wsn_ && p.wsn && t1 % cfg_.wsn_period_us == 0) {
      for (const auto& r : wsn_probe_.fire(*wsn_, t1, cfg_.wsn_period_us)) emit(r, cfg_.collectors.wsn);
    }
    if (wsn_ && p.app && t1 % cfg_.app_window_us == 0) {
      const auto& a = series_.wsn_arrivals;
      const auto count = a[series_.at(t1)] - a[series_.at(t1 - cfg_.app_window_us)];
      const auto signal = app_arrival_signal(cfg_.app_server_id);
      if (training_) {
        samples[signal].push_back(static_cast<double>(count) / seconds_of(cfg_.app_window_us));
      } else if (auto r = app_probe(count, cfg_.app_window_us, profile(signal), cfg_.app_server_id, t1)) {
        emit(*r, cfg_.collectors.app);
      }
    }
    if (net_ && t1 % cfg_.traffic_window_us == 0) {
      if (p.traffic) {
        for (const auto& id : traffic_routers_) {
          emit(traffic_probe(meter_.sample(net_->router(id), cfg_.traffic_window_us), t1),
               cfg_.collectors.traffic);
        }
      }
      if (p.host) {
        for (const auto& [id, s] : net_->servers()) emit(host_probe(s, t1), cfg_.collectors.host);
      }
      monitoring_row(t1);
    }
    if (gps_ && p.gps) {
      for (const auto& s : snaps) {
        for (const auto& r : gps_bank_.observe(s)) emit(r, cfg_.collectors.gps);
      }
    }
  }

  void monitoring_row(TimeUs t1) {
    if (training_) return;
    for (const auto& f : net_->flows()) {
      if (f.kind != FlowKind::Monitoring) continue;
      auto& last = mon_last_[f.flow_id];
      DeliveryRow row;
      row.flow_id = f.flow_id;
      row.t_end_us = t1;
      row.offered = f.offered - last.first;
      row.delivered = f.delivered - last.second;
      row.ratio = row.offered > 0 ? static_cast<double>(row.delivered) / static_cast<double>(row.offered) : 1.0;
      last = {f.offered, f.delivered};
      for (const auto& path : f.paths) row.paths.push_back({join(path.routers, "-"), path.enabled, path.injected});
      report.monitoring.push_back(std::move(row));
    }
  }

  void collect_all(TimeUs now) {
    for (auto& [id, s] : sources_) {
      if (const auto drops = s.source.take_new_drops(); drops > 0) {
        s.stats.overflow_dropped += drops;
        sim(now, "collector", "collector_overflow", {{"source", id}, {"dropped", drops}}, Severity::Warning);
      }
      std::vector<RawRecord> batch;
      try {
        batch = collect(s.collector, s.source, now);
      } catch (const SourceUnavailable&) {
        continue;
      }
      for (const auto& r : batch) {
        ++s.stats.collected;
        NormalizedEvent e;
        try {
          e = normalizer_.normalize(r);
        } catch (const ParseError&) {
          ++s.stats.parse_errors;
          continue;
        }
        if (training_) learn(e);
        try {
          append(std::move(e));
        } catch (const OutOfOrder&) {
          ++s.stats.late_rejected;
        }
      }
    }
  }

  void learn(const NormalizedEvent& e) {
    if (e.event_type == "packet_rate_report") {
      samples[wsn_rate_signal(e.get_string("node_id"))].push_back(e.get_real("rate_pps"));
    } else if (e.event_type == "traffic_report") {
      samples[traffic_ratio_signal(e.get_string("router_id"))].push_back(e.get_real("syn_to_ack_ratio"));
    } else if (e.event_type == "host_report") {
      samples[host_occupancy_signal(e.get_string("server_id"))].push_back(e.get_real("occupancy"));
    }
  }

  void drive_engine(TimeUs now, TimeUs cutoff, bool live) {
    auto out = feed_.pump(
        store_.ordered_size(), [this](std::size_t i) -> const NormalizedEvent& { return store_.ordered_at(i); },
        cutoff);
    for (const auto& a : out.alerts) {
      append(alert_event(a, now));
      alerts.push_back(a);
    }
    for (const auto& inc : out.incidents) {
      append(incident_event(inc, now));
      report.incidents.push_back({inc, std::nullopt, false});
      if (reaction_enabled_ && live) start_plan(inc, now);
    }
  }

  // --- reaction -----------------------------------------------------------

  TimeUs verify_window(IncidentKind k) const {
    switch (k) {
      case IncidentKind::SleepDeprivation: return cfg_.app_window_us;
      case IncidentKind::SynFlood: return cfg_.traffic_window_us;
      case IncidentKind::GpsSpoof: return 3 * cfg_.gps_epoch_us;
    }
    return cfg_.app_window_us;
  }

  double benign_threshold(IncidentKind k) const {
    switch (k) {
      case IncidentKind::SleepDeprivation: {
        const auto* p = profile(app_arrival_signal(cfg_.app_server_id));
        return p ? p->threshold : std::numeric_limits<double>::infinity();
      }
      case IncidentKind::SynFlood: return 0.01;
      case IncidentKind::GpsSpoof: return 0.0;
    }
    return 0;
  }

  double symptom(IncidentKind k, const std::string& culprit, TimeUs a, TimeUs b) const {
    switch (k) {
      case IncidentKind::SleepDeprivation: return series_.arrival_rate(a, b);
      case IncidentKind::SynFlood: return series_.monitoring_loss(a, b);
      case IncidentKind::GpsSpoof: return series_.gps_discrepancy(culprit, a, b);
    }
    return 0;
  }

  void start_plan(const Incident& inc, TimeUs now) {
    ReactionRow row;
    row.incident_id = inc.incident_id;
    row.kind = std::string(to_string(inc.kind));
    try {
      PlanState st;
      st.plan = plan(inc, cfg_.catalog);
      st.culprit = inc.culprit.value_or("");
      st.due_us = now;
      for (const auto& s : st.plan.steps) {
        row.steps.push_back({s.strategy.strategy_id, std::string(to_string(s.strategy.action)), s.target,
                             std::string(to_string(Verdict::NotAttempted)), std::nullopt, std::nullopt, 0, 0});
      }
      plans_.push_back(std::move(st));
      plan_rows_.push_back(report.reactions.size());
    } catch (const Error& e) {
      row.error = e.what();
      row.outcome = std::string(to_string(Verdict::NotAttempted));
    }
    report.reactions.push_back(std::move(row));
  }

  void record(std::size_t pi, TimeUs now) {
    auto& st = plans_[pi];
    auto& row = report.reactions[plan_rows_[pi]];
    const auto& step = st.plan.steps[st.step];
    auto& r = row.steps[st.step];
    r.verdict = std::string(to_string(step.verdict));
    r.cause = step.cause;
    r.applied_us = step.applied_us;
    r.metric_pre = step.metric_pre;
    r.metric_post = step.metric_post;
    row.outcome = r.verdict;
    Attrs attrs{{"incident_id", static_cast<std::int64_t>(st.plan.incident_id)},
                {"step", static_cast<std::int64_t>(st.step)},
                {"strategy", step.strategy.strategy_id},
                {"action", std::string(to_string(step.strategy.action))},
                {"target", step.target},
                {"verdict", r.verdict}};
    if (step.cause) attrs["cause"] = *step.cause;
    NormalizedEvent e;
    e.ts_us = now;
    e.source_id = "reaction";
    e.source_kind = SourceKind::Engine;
    e.event_type = "reaction_step";
    e.severity = step.verdict == Verdict::Failed ? Severity::Warning : Severity::Info;
    e.attrs = std::move(attrs);
    append(std::move(e));
  }

  void react(TimeUs now) {
    ReactionTargets targets{wsn_ ? &*wsn_ : nullptr, net_ ? &*net_ : nullptr, gps_ ? &*gps_ : nullptr,
                            &reaction_rng_};
    for (std::size_t pi = 0; pi < plans_.size(); ++pi) {
      auto& st = plans_[pi];
      while (!st.plan.finished() && st.due_us <= now) {
        auto& step = st.plan.steps[st.step];
        const TimeUs w = verify_window(st.plan.kind);
        if (!st.verifying) {
          step.applied_us = now;
          step.metric_pre = symptom(st.plan.kind, st.culprit, now - w, now);
          try {
            apply(step, targets);
            st.verifying = true;
            st.due_us = now + w;
          } catch (const ActionFailed& e) {
            step.verdict = Verdict::Failed;
            step.cause = e.what();
            record(pi, now);
            ++st.step;
          }
          continue;
        }
        step.metric_post = symptom(st.plan.kind, st.culprit, now - w, now);
        step.verdict = verify(step.metric_pre, step.metric_post, benign_threshold(st.plan.kind));
        if (step.verdict == Verdict::Failed) step.cause = "symptom persisted after the action";
        record(pi, now);
        st.verifying = false;
        ++st.step;
      }
    }
  }

  // --- report ---------------------------------------------------------------

  void snapshot_wsn_start() {
    wsn_start_ = wsn_->nodes();
    const auto route = wsn_->route_path(cfg_.wsn_attack->attacker_node);
    std::set<std::string> path(route.begin(), route.end());
    // A forged loop is part of the attacked path: that is where the traffic goes.
    if (cfg_.wsn_attack->mode == WsnAttackMode::ForgedRrepLoop) {
      path.insert(cfg_.wsn->loop_nodes.begin(), cfg_.wsn->loop_nodes.end());
    }
    for (const auto& id : path) {
      if (id != cfg_.wsn_attack->attacker_node && id != wsn_->config().base_station) on_path_.insert(id);
    }
    for (const auto& id : wsn_->sensor_ids()) {
      try {
        routes_[id] = wsn_->route_path(id);
      } catch (const Error&) {
        routes_[id] = {};
      }
    }
  }

  void snapshot_wsn_end() {
    if (wsn_start_.empty() || !wsn_end_.empty()) return;
    wsn_end_ = wsn_->nodes();
  }

  void finish() {
    if (training_) return;
    if (wsn_ && cfg_.wsn_attack && wsn_started_) snapshot_wsn_end();
    drive_engine(cfg_.duration_us, std::numeric_limits<TimeUs>::max(), false);
    for (std::size_t pi = 0; pi < plans_.size(); ++pi) {
      auto& st = plans_[pi];
      if (st.verifying) {
        report.reactions[plan_rows_[pi]].steps[st.step].cause = "run ended before verification";
        report.reactions[plan_rows_[pi]].steps[st.step].applied_us = st.plan.steps[st.step].applied_us;
        report.reactions[plan_rows_[pi]].steps[st.step].metric_pre = st.plan.steps[st.step].metric_pre;
      }
    }

    report.scenario = cfg_.name;
    report.seed = cfg_.seed;
    report.duration_us = cfg_.duration_us;
    report.tick_us = cfg_.tick_us;
    report.reaction_enabled = reaction_enabled_;

    if (cfg_.wsn_attack) {
      const auto& a = *cfg_.wsn_attack;
      report.attacks.push_back(truth(std::string(to_string(IncidentKind::SleepDeprivation)), std::string(to_string(a.mode)),
                                     a.attacker_node, a.start_us, wsn_->attack_ended_at().value_or(a.stop_us)));
    }
    if (cfg_.ddos) {
      const auto& d = *cfg_.ddos;
      report.attacks.push_back(
          truth(std::string(to_string(IncidentKind::SynFlood)), "syn_flood", d.target_server, d.start_us, d.stop_us));
    }
    if (cfg_.spoof) {
      const auto& s = *cfg_.spoof;
      report.attacks.push_back(truth(std::string(to_string(IncidentKind::GpsSpoof)), std::string(to_string(s.mode)),
                                     s.target_receiver, s.start_us, s.stop_us));
    }
    // Attacks that never started inside the run still count as injected.

    if (wsn_) {
      for (const auto& [id, n] : wsn_->nodes()) {
        if (id == wsn_->config().base_station) continue;
        NodeRow row;
        row.node_id = id;
        row.alive = n.alive;
        row.drain_total = n.energy_used;
        if (!wsn_start_.empty()) {
          const auto& s = wsn_start_.at(id);
          const auto& e = wsn_end_.at(id);
          row.drain_attack = e.energy_used - s.energy_used;
          row.data_originated_attack = e.data_originated - s.data_originated;
          row.data_dropped_attack = e.data_dropped - s.data_dropped;
          row.loss_attack = row.data_originated_attack > 0 ? static_cast<double>(row.data_dropped_attack) /
                                                                 static_cast<double>(row.data_originated_attack)
                                                           : 0.0;
          row.on_attack_path = on_path_.count(id) != 0;
          row.route_at_onset = routes_[id];
        }
        report.wsn_nodes.push_back(std::move(row));
      }
    }
    if (net_) {
      for (const auto& [id, s] : net_->servers()) {
        report.servers.push_back({id, s.first_saturated_us, s.syn_received, s.syn_rejected, s.expired});
      }
    }
    for (const auto& [id, s] : sources_) report.collectors.push_back(s.stats);

    auto& counts = report.alarm_counts;
    counts["probe_alarms"] = 0;
    counts["probe_warnings"] = 0;
    counts["alerts"] = static_cast<std::int64_t>(alerts.size());
    for (const auto& r : cfg_.rules) counts["incidents." + r.rule_id] = 0;
    for (const auto& e : store_.log()) {
      if (!is_probe(e.source_kind)) continue;
      if (e.severity == Severity::Alarm) ++counts["probe_alarms"];
      if (e.severity == Severity::Warning) ++counts["probe_warnings"];
    }
    for (const auto& a : alerts) ++counts["alerts." + a.rule_id];
    for (const auto& i : report.incidents) ++counts["incidents." + i.incident.rule_id];
    report.events_logged = static_cast<std::int64_t>(store_.size());
    account(report, cfg_.rules);
  }

  const ScenarioConfig& cfg_;
  bool training_;
  bool reaction_enabled_;

  std::optional<WsnSim> wsn_;
  std::optional<IpNetSim> net_;
  std::optional<GpsSim> gps_;
  std::vector<std::string> traffic_routers_;

  WsnProbe wsn_probe_;
  TrafficMeter meter_;
  GpsProbeBank gps_bank_;
  Normalizer normalizer_;
  std::map<std::string, ThresholdProfile> profiles_;
  std::map<std::string, SourceSlot> sources_;

  EngineFeed feed_;
  Rng reaction_rng_;
  std::vector<PlanState> plans_;
  std::vector<std::size_t> plan_rows_;  // plan index -> report.reactions index

  Series series_;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> mon_last_;

  bool wsn_started_ = false, wsn_ended_ = false;
  bool ddos_started_ = false, ddos_ended_ = false;
  bool spoof_started_ = false, spoof_ended_ = false;
  std::map<std::string, WsnNode> wsn_start_, wsn_end_;
  std::set<std::string> on_path_;
  std::map<std::string, std::vector<std::string>> routes_;
};

ScenarioConfig benign_variant(ScenarioConfig cfg) {
  cfg.wsn_attack.reset();
  cfg.ddos.reset();
  cfg.spoof.reset();
  cfg.attack_index.clear();
  if (cfg.wsn) cfg.wsn->proxy_surge_pps = 0;
  cfg.duration_us = cfg.training_us;
  cfg.reaction_enabled = false;
  return cfg;
}

}  // namespace

std::map<std::string, ThresholdProfile> train_profiles(const ScenarioConfig& cfg) {
  const auto benign = benign_variant(cfg);
  Pipeline p(benign, true, {}, false);
  p.run();
  std::map<std::string, ThresholdProfile> out;
  for (const auto& [signal, xs] : p.samples) out[signal] = train_threshold(xs, cfg.k, signal);
  return out;
}

RunResult run(ScenarioConfig cfg, const RunOptions& options) {
  if (options.seed) cfg.seed = *options.seed;
  if (options.duration_us) {
    if (*options.duration_us <= 0) throw ConfigInvalid("--duration: must be positive");
    cfg.duration_us = *options.duration_us;
  }
  if (options.no_reaction) cfg.reaction_enabled = false;
  validate_scenario(cfg);

  RunResult result;
  result.profiles = train_profiles(cfg);
  Pipeline p(cfg, false, result.profiles, cfg.reaction_enabled);
  if (options.log_path) p.set_log_path(*options.log_path);
  p.run();
  result.report = std::move(p.report);
  result.log = p.store_.log();
  result.alerts = std::move(p.alerts);
  result.final_digest = p.digest();
  return result;
}

Engine replay_engine(const std::vector<NormalizedEvent>& log, const std::vector<CorrelationRule>& rules) {
  std::vector<const NormalizedEvent*> order;
  for (const auto& e : log) {
    if (e.source_kind != SourceKind::Engine) order.push_back(&e);
  }
  std::stable_sort(order.begin(), order.end(), [](const NormalizedEvent* a, const NormalizedEvent* b) {
    return a->ts_us != b->ts_us ? a->ts_us < b->ts_us : a->event_id < b->event_id;
  });
  EngineFeed feed(rules);
  feed.pump(order.size(), [&](std::size_t i) -> const NormalizedEvent& { return *order[i]; },
            std::numeric_limits<TimeUs>::max());
  return std::move(feed.engine());
}

RunReport replay(const std::vector<NormalizedEvent>& log, const std::vector<CorrelationRule>& rules) {
  RunReport report;
  report.scenario = "replay";
  report.replayed = true;
  report.events_logged = static_cast<std::int64_t>(log.size());
  const Engine engine = replay_engine(log, rules);
  for (const auto& inc : engine.incidents()) report.incidents.push_back({inc, std::nullopt, false});

  std::map<std::string, std::size_t> by_kind;
  for (const auto& e : log) {
    if (e.source_kind != SourceKind::Simulator) continue;
    if (e.event_type == "attack_injected") {
      by_kind[e.get_string("attack_kind")] = report.attacks.size();
      report.attacks.push_back(truth(e.get_string("attack_kind"), e.get_string("mode"), e.get_string("target"), e.ts_us,
                                     std::numeric_limits<TimeUs>::max()));
    } else if (e.event_type == "attack_ended") {
      if (auto it = by_kind.find(e.get_string("attack_kind")); it != by_kind.end()) {
        report.attacks[it->second].stop_us = e.ts_us;
      }
    }
    report.duration_us = std::max(report.duration_us, e.ts_us);
  }
  auto& counts = report.alarm_counts;
  counts["probe_alarms"] = 0;
  counts["probe_warnings"] = 0;
  counts["alerts"] = static_cast<std::int64_t>(engine.alerts().size());
  for (const auto& r : rules) counts["incidents." + r.rule_id] = 0;
  for (const auto& e : log) {
    if (!is_probe(e.source_kind)) continue;
    if (e.severity == Severity::Alarm) ++counts["probe_alarms"];
    if (e.severity == Severity::Warning) ++counts["probe_warnings"];
  }
  for (const auto& a : engine.alerts()) ++counts["alerts." + a.rule_id];
  for (const auto& i : report.incidents) ++counts["incidents." + i.incident.rule_id];
  account(report, rules);
  return report;
}

RunReport replay_file(const std::filesystem::path& log_path, const std::vector<CorrelationRule>& rules) {
  return replay(read_log_file(log_path), rules);
}

void account(RunReport& report, const std::vector<CorrelationRule>& rules) {
  std::map<std::string, TimeUs> window;
  for (const auto& r : rules) window[r.rule_id] = r.window_us;
  for (auto& a : report.attacks) {
    a.detected = false;
    a.incident_id.reset();
    a.latency_us.reset();
  }
  report.false_positives = 0;
  for (auto& row : report.incidents) {
    const auto& inc = row.incident;
    const TimeUs w = window.count(inc.rule_id) ? window[inc.rule_id] : 0;
    row.latency_us.reset();
    row.false_positive = true;
    for (auto& a : report.attacks) {
      if (a.kind != to_string(inc.kind)) continue;
      // Evidence of an attack can still sit in the window right after it ends.
      const TimeUs late = a.stop_us == std::numeric_limits<TimeUs>::max() ? a.stop_us : a.stop_us + w;
      if (inc.window_end_us < a.start_us || inc.window_end_us > late) continue;
      row.false_positive = false;
      row.latency_us = inc.window_end_us - a.start_us;
      if (!a.detected) {
        a.detected = true;
        a.incident_id = inc.incident_id;
        a.latency_us = row.latency_us;
      }
      break;
    }
    if (row.false_positive) ++report.false_positives;
  }
}

}  // namespace gridsiem
