#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridsiem/events.hpp"
#include "gridsiem/rng.hpp"

namespace gridsiem {

enum class WsnPacketKind { Data, BroadcastRouting, Rreq, Rrep };

struct WsnPacket {
  std::string origin_node;
  WsnPacketKind kind = WsnPacketKind::Data;
  int hop_count = 0;
  int ttl = 0;
};

struct WsnNode {
  std::string node_id;
  std::optional<std::string> parent;  // none for the base station
  double battery_units = 0;
  double gen_rate_pps = 0;
  bool alive = true;     // battery_units > 0
  bool asleep = false;   // switched off by a reaction
  bool isolated = false; // cut from every neighbour set by a reaction
  std::set<std::string> neighbors;

  // Cumulative counters.
  std::int64_t originated = 0;       // every packet this node created
  std::int64_t data_originated = 0;
  std::int64_t data_delivered = 0;   // own data that reached the base station
  std::int64_t data_dropped = 0;     // own data lost anywhere on the way
  std::int64_t forwarded = 0;        // relayed transmissions
  std::int64_t received = 0;
  std::int64_t capacity_drops = 0;   // packets this node had to refuse
  double energy_used = 0;

  bool participating() const { return alive && !asleep && !isolated; }
};

enum class WsnAttackMode { BroadcastFlood, RreqFlood, ForgedRrepLoop };

std::string_view to_string(WsnAttackMode m);
std::optional<WsnAttackMode> parse_wsn_attack_mode(std::string_view s);

struct AttackConfigWsn {
  std::string attacker_node;
  WsnAttackMode mode = WsnAttackMode::BroadcastFlood;
  double attack_rate_pps = 0;
  TimeUs start_us = 0;
  TimeUs stop_us = 0;
};

struct WsnEnergyModel {
  double c_tx = 0.01;
  double c_rx = 0.005;
};

/// Energy consumed by a node for the given activity. Idle costs nothing.
double battery_drain_model(const WsnEnergyModel& model, std::int64_t originated,
                           std::int64_t forwarded, std::int64_t received);

struct WsnNodeSpec {
  std::string id;
  std::string parent;
  double gen_rate_pps = 0;
};

struct WsnConfig {
  std::string base_station = "bs";
  std::vector<WsnNodeSpec> nodes;
  std::vector<std::pair<std::string, std::string>> extra_links;  // besides tree edges
  double capacity_pps = 200;   // per-node forwarding capacity
  int ttl = 16;
  WsnEnergyModel energy;
  double battery_units = 10000;
  double fool_prob = 0.02;     // chance a heard broadcast flips a neighbour's parent
  std::vector<std::string> loop_nodes;  // cycle forged in ForgedRrepLoop mode, in parent order

  // Legitimate extra load injected at the proxy, not inside the WSN.
  double proxy_surge_pps = 0;
  TimeUs proxy_surge_start_us = 0;
  TimeUs proxy_surge_stop_us = 0;
};

struct WsnTickObservation {
  TimeUs t_end_us = 0;
  std::map<std::string, std::int64_t> originated;  // per node, this tick
  std::int64_t server_arrivals = 0;
  std::int64_t transmissions = 0;
  std::vector<std::string> died;
};

/// Discrete-time model of the sensor tree, base station, proxy and
/// application server. Packets cross the whole tree within one tick.
class WsnSim {
 public:
  WsnSim(WsnConfig config, std::uint64_t seed);

  WsnTickObservation step(TimeUs dt_us);

  /// Throws UnknownNode when the attacker does not exist or is not alive.
  void inject_attack(const AttackConfigWsn& cfg);

  /// Parent chain from `node` to the base station, inclusive of both ends.
  std::vector<std::string> route_path(const std::string& node) const;

  // Reaction hooks.
  void reprogram(const std::string& node);
  void put_to_sleep(const std::string& node);
  void isolate(const std::string& node);

  TimeUs now() const { return now_us_; }
  const WsnConfig& config() const { return config_; }
  const std::map<std::string, WsnNode>& nodes() const { return nodes_; }
  const WsnNode& node(const std::string& id) const;
  bool has_node(const std::string& id) const { return nodes_.count(id) != 0; }
  std::vector<std::string> sensor_ids() const;  // every node but the base station

  std::int64_t server_arrivals() const { return server_arrivals_; }
  std::int64_t transmissions() const { return transmissions_; }
  const std::optional<AttackConfigWsn>& attack() const { return attack_; }
  bool attack_active() const { return attack_running_; }
  /// Time the attack actually ended (stop_us, or when a reaction neutralised it).
  std::optional<TimeUs> attack_ended_at() const { return attack_ended_at_; }
  std::optional<std::string> attack_end_reason() const { return attack_end_reason_; }

  /// Canonical text of the full state, for determinism and purity checks.
  std::string digest() const;

 private:
  struct Batch {
    std::string origin;
    WsnPacketKind kind;
    std::string at;
    std::int64_t count;
    int ttl;
    int hops;
  };

  bool attacker_can_act() const;
  void update_attack_phase(TimeUs t0);
  void start_loop();
  void restore_loop();
  void repair_routes();
  bool reaches_base(const std::string& id) const;
  void end_attack(TimeUs t, const std::string& reason);

  WsnConfig config_;
  Rng rng_;
  TimeUs now_us_ = 0;
  std::map<std::string, WsnNode> nodes_;
  std::map<std::string, std::string> tree_parent_;  // benign parents
  std::map<std::string, std::string> forged_parent_;
  std::optional<AttackConfigWsn> attack_;
  bool attack_running_ = false;
  bool attacker_reprogrammed_ = false;
  std::optional<TimeUs> attack_ended_at_;
  std::optional<std::string> attack_end_reason_;
  std::int64_t server_arrivals_ = 0;
  std::int64_t transmissions_ = 0;
  std::map<std::string, TimeUs> gen_ref_us_;
};

/// The ten-node fixture tree used by the bundled scenarios: base station
/// "bs", depth at most 3, with a few cross links for re-parenting.
WsnConfig wsn_fixture_config();

}  // namespace gridsiem
