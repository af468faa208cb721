#include "gridsiem/reaction.hpp"

#include <algorithm>
#include <sstream>

#include "gridsiem/errors.hpp"

namespace gridsiem {

std::string_view to_string(ReactionAction a) {
  switch (a) {
    case ReactionAction::WsnReprogram: return "WsnReprogram";
    case ReactionAction::WsnSleep: return "WsnSleep";
    case ReactionAction::WsnIsolate: return "WsnIsolate";
    case ReactionAction::DisablePathAndReroute: return "DisablePathAndReroute";
    case ReactionAction::GpsFlagHoldover: return "GpsFlagHoldover";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Stopped: return "Stopped";
    case Verdict::Mitigated: return "Mitigated";
    case Verdict::Failed: return "Failed";
    case Verdict::NotAttempted: return "NotAttempted";
  }
  return "?";
}

std::optional<ReactionAction> parse_reaction_action(std::string_view s) {
  for (auto a : {ReactionAction::WsnReprogram, ReactionAction::WsnSleep, ReactionAction::WsnIsolate,
                 ReactionAction::DisablePathAndReroute, ReactionAction::GpsFlagHoldover}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

IncidentKind action_kind(ReactionAction a) {
  switch (a) {
    case ReactionAction::WsnReprogram:
    case ReactionAction::WsnSleep:
    case ReactionAction::WsnIsolate: return IncidentKind::SleepDeprivation;
    case ReactionAction::DisablePathAndReroute: return IncidentKind::SynFlood;
    case ReactionAction::GpsFlagHoldover: return IncidentKind::GpsSpoof;
  }
  return IncidentKind::SleepDeprivation;
}

StrategyCatalog default_catalog() {
  StrategyCatalog c;
  c[IncidentKind::SleepDeprivation] = {
      {"reprogram", IncidentKind::SleepDeprivation, ReactionAction::WsnReprogram, {{"success_prob", "0.7"}}},
      {"sleep", IncidentKind::SleepDeprivation, ReactionAction::WsnSleep, {}},
      {"isolate", IncidentKind::SleepDeprivation, ReactionAction::WsnIsolate, {}}};
  c[IncidentKind::SynFlood] = {
      {"reroute", IncidentKind::SynFlood, ReactionAction::DisablePathAndReroute, {}}};
  c[IncidentKind::GpsSpoof] = {
      {"holdover", IncidentKind::GpsSpoof, ReactionAction::GpsFlagHoldover, {}}};
  return c;
}

void validate_catalog(const StrategyCatalog& catalog) {
  for (const auto& [kind, list] : catalog) {
    for (const auto& s : list) {
      if (s.incident_kind != kind || action_kind(s.action) != kind) {
        throw Error("strategy '" + s.strategy_id + "' (" + std::string(to_string(s.action)) +
                    ") cannot treat " + std::string(to_string(kind)));
      }
    }
  }
}

std::size_t ReactionPlan::next_step() const {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].verdict == Verdict::NotAttempted) return i;
  }
  return steps.size();
}

bool ReactionPlan::finished() const {
  for (const auto& s : steps) {
    if (s.verdict == Verdict::Stopped || s.verdict == Verdict::Mitigated) return true;
  }
  return next_step() == steps.size();
}

namespace {

std::string routers_of(const std::string& details) {
  const std::string key = "routers=";
  auto pos = details.find(key);
  if (pos == std::string::npos) return {};
  auto end = details.find(';', pos);
  return details.substr(pos + key.size(), end == std::string::npos ? std::string::npos : end - pos - key.size());
}

std::set<std::string> split_list(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

}  // namespace

ReactionPlan plan(const Incident& incident, const StrategyCatalog& catalog) {
  auto it = catalog.find(incident.kind);
  if (it == catalog.end() || it->second.empty()) {
    throw NoStrategy("no strategy for " + std::string(to_string(incident.kind)));
  }
  ReactionPlan p;
  p.incident_id = incident.incident_id;
  p.kind = incident.kind;
  for (const auto& s : it->second) {
    PlanStep step;
    step.strategy = s;
    step.strategy.params["confidence"] = std::string(to_string(incident.confidence));
    if (incident.culprit) step.strategy.params["culprit"] = *incident.culprit;
    if (s.action == ReactionAction::DisablePathAndReroute) {
      const auto routers = routers_of(incident.details);
      if (routers.empty()) throw MissingCulprit("SYN flood incident names no alarmed router");
      step.strategy.params["routers"] = routers;
      step.target = routers;
    } else {
      if (!incident.culprit || incident.culprit->empty()) {
        throw MissingCulprit(std::string(to_string(s.action)) + " needs a culprit");
      }
      step.target = *incident.culprit;
    }
    p.steps.push_back(std::move(step));
  }
  return p;
}

namespace {

void reroute(IpNetSim& net, const std::set<std::string>& alarmed) {
  for (const auto& f : net.flows()) {
    if (f.kind != FlowKind::Monitoring) continue;
    bool touched = false;
    for (std::size_t i = 0; i < f.paths.size(); ++i) {
      const auto& p = f.paths[i];
      if (!p.enabled) continue;
      const bool hit = std::any_of(p.routers.begin(), p.routers.end(),
                                   [&](const std::string& r) { return alarmed.count(r) != 0; });
      if (hit) {
        net.disable_path(f.flow_id, i);
        touched = true;
      }
    }
    if (!touched) continue;
    const auto& now = net.flow(f.flow_id);
    const bool any_left = std::any_of(now.paths.begin(), now.paths.end(),
                                      [](const FlowPath& p) { return p.enabled; });
    if (any_left) continue;
    std::vector<Path> fresh;
    try {
      fresh = compute_disjoint_paths(net.topology(), net.router_of(f.src), net.router_of(f.dst), 1, alarmed);
    } catch (const InsufficientDisjointness& e) {
      throw ActionFailed("no path for '" + f.flow_id + "' avoids the alarmed routers: " + e.what());
    }
    net.add_path(f.flow_id, fresh.front());
  }
}

}  // namespace

void apply(const PlanStep& step, ReactionTargets& t) {
  const auto& s = step.strategy;
  try {
    switch (s.action) {
      case ReactionAction::WsnReprogram: {
        if (!t.wsn) throw ActionFailed("no sensor network in this scenario");
        double p = 0.7;
        if (auto it = s.params.find("success_prob"); it != s.params.end()) p = std::stod(it->second);
        if (!t.wsn->has_node(step.target)) throw ActionFailed("unknown node '" + step.target + "'");
        const double draw = t.rng ? t.rng->uniform() : 0.0;
        if (!(draw < p)) throw ActionFailed("over-the-air reprogramming of '" + step.target + "' did not take");
        t.wsn->reprogram(step.target);
        break;
      }
      case ReactionAction::WsnSleep:
        if (!t.wsn) throw ActionFailed("no sensor network in this scenario");
        t.wsn->put_to_sleep(step.target);
        break;
      case ReactionAction::WsnIsolate:
        if (!t.wsn) throw ActionFailed("no sensor network in this scenario");
        t.wsn->isolate(step.target);
        break;
      case ReactionAction::DisablePathAndReroute:
        if (!t.ipnet) throw ActionFailed("no wired network in this scenario");
        reroute(*t.ipnet, split_list(s.params.count("routers") ? s.params.at("routers") : step.target));
        break;
      case ReactionAction::GpsFlagHoldover:
        if (!t.gps) throw ActionFailed("no GPS model in this scenario");
        t.gps->flag_holdover(step.target);
        break;
    }
  } catch (const ActionFailed&) {
    throw;
  } catch (const Error& e) {
    throw ActionFailed(e.what());
  }
}

Verdict verify(double pre, double post, double thr) {
  if (post <= thr) return Verdict::Stopped;
  if (pre > thr && (pre - post) >= 0.5 * (pre - thr)) return Verdict::Mitigated;
  return Verdict::Failed;
}

}  // namespace gridsiem
