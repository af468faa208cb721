#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridsiem/engine.hpp"
#include "gridsiem/gps.hpp"
#include "gridsiem/ipnet.hpp"
#include "gridsiem/rng.hpp"
#include "gridsiem/wsn.hpp"

namespace gridsiem {

enum class ReactionAction { WsnReprogram, WsnSleep, WsnIsolate, DisablePathAndReroute, GpsFlagHoldover };
enum class Verdict { Stopped, Mitigated, Failed, NotAttempted };

std::string_view to_string(ReactionAction a);
std::string_view to_string(Verdict v);
std::optional<ReactionAction> parse_reaction_action(std::string_view s);

/// The incident kind an action is able to treat.
IncidentKind action_kind(ReactionAction a);

struct Strategy {
  std::string strategy_id;
  IncidentKind incident_kind = IncidentKind::SleepDeprivation;
  ReactionAction action = ReactionAction::WsnReprogram;
  std::map<std::string, std::string> params;
};

/// Strategies per incident kind, most effective first.
using StrategyCatalog = std::map<IncidentKind, std::vector<Strategy>>;

/// Reprogram, sleep, isolate for sleep deprivation; re-route for SYN floods;
/// clock holdover for GPS spoofing.
StrategyCatalog default_catalog();

/// Throws Error when a strategy's action does not fit its incident kind.
void validate_catalog(const StrategyCatalog& catalog);

struct PlanStep {
  Strategy strategy;  // params carry the diagnosis (culprit, confidence, routers)
  std::string target;
  Verdict verdict = Verdict::NotAttempted;
  std::optional<std::string> cause;  // why an attempt failed
  std::optional<TimeUs> applied_us;
  double metric_pre = 0;
  double metric_post = 0;
};

struct ReactionPlan {
  std::uint64_t incident_id = 0;
  IncidentKind kind = IncidentKind::SleepDeprivation;
  std::vector<PlanStep> steps;

  /// Index of the first step still NotAttempted, or steps.size().
  std::size_t next_step() const;
  bool finished() const;
};

/// Throws NoStrategy when the catalog has nothing for the incident kind and
/// MissingCulprit when a step needs a target the incident does not name.
ReactionPlan plan(const Incident& incident, const StrategyCatalog& catalog);

/// What apply() may touch. Null members are simulators the scenario lacks.
struct ReactionTargets {
  WsnSim* wsn = nullptr;
  IpNetSim* ipnet = nullptr;
  GpsSim* gps = nullptr;
  Rng* rng = nullptr;  // reprogram success draws
};

/// Carries out one step. Throws ActionFailed (with the cause as message)
/// when the action did not take effect.
void apply(const PlanStep& step, ReactionTargets& targets);

/// Stopped when post is within the benign threshold, Mitigated when at least
/// half of the excess above the threshold is gone, Failed otherwise.
Verdict verify(double metric_pre, double metric_post, double benign_threshold);

}  // namespace gridsiem
