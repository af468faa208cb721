#include "gridsiem/wsn.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "gridsiem/apportion.hpp"
#include "gridsiem/errors.hpp"

namespace gridsiem {

namespace {

constexpr std::array<std::string_view, 3> kModeNames = {"broadcast_flood", "rreq_flood",
                                                        "forged_rrep_loop"};

}  // namespace

std::string_view to_string(WsnAttackMode m) { return kModeNames[static_cast<std::size_t>(m)]; }

std::optional<WsnAttackMode> parse_wsn_attack_mode(std::string_view s) {
  for (std::size_t i = 0; i < kModeNames.size(); ++i) {
    if (kModeNames[i] == s) return static_cast<WsnAttackMode>(i);
  }
  return std::nullopt;
}

double battery_drain_model(const WsnEnergyModel& model, std::int64_t originated,
                           std::int64_t forwarded, std::int64_t received) {
  return model.c_tx * static_cast<double>(originated + forwarded) +
         model.c_rx * static_cast<double>(received);
}

WsnConfig wsn_fixture_config() {
  WsnConfig c;
  c.base_station = "bs";
  c.nodes = {{"n1", "bs", 5}, {"n2", "bs", 5}, {"n3", "bs", 5}, {"n4", "n1", 5},
             {"n5", "n1", 5}, {"n6", "n2", 5}, {"n7", "n2", 5}, {"n8", "n3", 5},
             {"n9", "n4", 5}, {"n10", "n6", 5}};
  c.extra_links = {{"n4", "n5"}, {"n5", "n6"}, {"n2", "n3"},
                   {"n7", "n8"}, {"n9", "n5"}, {"n6", "n7"}};
  c.loop_nodes = {"n2", "n6", "n7"};
  return c;
}

WsnSim::WsnSim(WsnConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(Rng::derived(seed, "wsn")) {
  WsnNode base;
  base.node_id = config_.base_station;
  base.battery_units = 0;
  nodes_.emplace(base.node_id, base);
  for (const auto& spec : config_.nodes) {
    if (spec.id == config_.base_station || nodes_.count(spec.id)) {
      throw UnknownNode("duplicate wsn node '" + spec.id + "'");
    }
    WsnNode n;
    n.node_id = spec.id;
    n.parent = spec.parent;
    n.gen_rate_pps = spec.gen_rate_pps;
    n.battery_units = config_.battery_units;
    n.alive = n.battery_units > 0;
    nodes_.emplace(spec.id, n);
    tree_parent_[spec.id] = spec.parent;
  }
  auto link = [this](const std::string& a, const std::string& b) {
    if (!nodes_.count(a) || !nodes_.count(b)) {
      throw UnknownNode("wsn link references unknown node '" + (nodes_.count(a) ? b : a) + "'");
    }
    nodes_[a].neighbors.insert(b);
    nodes_[b].neighbors.insert(a);
  };
  for (const auto& spec : config_.nodes) link(spec.id, spec.parent);
  for (const auto& [a, b] : config_.extra_links) link(a, b);
  // The benign parent graph must be a tree rooted at the base station.
  for (const auto& spec : config_.nodes) {
    auto path = route_path(spec.id);
    if (path.back() != config_.base_station) {
      throw LoopDetected("wsn node '" + spec.id + "' does not reach the base station");
    }
  }
}

const WsnNode& WsnSim::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw UnknownNode("unknown wsn node '" + id + "'");
  return it->second;
}

std::vector<std::string> WsnSim::sensor_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, n] : nodes_) {
    if (id != config_.base_station) out.push_back(id);
  }
  return out;
}

void WsnSim::inject_attack(const AttackConfigWsn& cfg) {
  auto it = nodes_.find(cfg.attacker_node);
  if (it == nodes_.end() || cfg.attacker_node == config_.base_station) {
    throw UnknownNode("unknown attacker node '" + cfg.attacker_node + "'");
  }
  if (!it->second.alive) throw UnknownNode("attacker node '" + cfg.attacker_node + "' is dead");
  if (cfg.attack_rate_pps <= 0 || cfg.start_us >= cfg.stop_us) {
    throw Error("invalid wsn attack: rate must be > 0 and start < stop");
  }
  if (cfg.mode == WsnAttackMode::ForgedRrepLoop) {
    if (config_.loop_nodes.size() < 2) throw Error("forged_rrep_loop needs at least two loop nodes");
    for (const auto& id : config_.loop_nodes) {
      if (!nodes_.count(id) || id == config_.base_station) {
        throw UnknownNode("unknown loop node '" + id + "'");
      }
    }
  }
  attack_ = cfg;
  attack_running_ = false;
  attacker_reprogrammed_ = false;
  attack_ended_at_.reset();
  attack_end_reason_.reset();
}

bool WsnSim::attacker_can_act() const {
  return attack_ && !attacker_reprogrammed_ && nodes_.at(attack_->attacker_node).participating();
}

void WsnSim::end_attack(TimeUs t, const std::string& reason) {
  if (attack_ended_at_) return;
  attack_running_ = false;
  attack_ended_at_ = t;
  attack_end_reason_ = reason;
  restore_loop();
}

void WsnSim::update_attack_phase(TimeUs t0) {
  if (!attack_ || attack_ended_at_) return;
  if (attack_running_ && t0 >= attack_->stop_us) {
    end_attack(attack_->stop_us, "stop_time");
    return;
  }
  if (!attack_running_ && t0 >= attack_->start_us && t0 < attack_->stop_us && attacker_can_act()) {
    attack_running_ = true;
    if (attack_->mode == WsnAttackMode::ForgedRrepLoop) start_loop();
  }
}

void WsnSim::start_loop() {
  const auto& loop = config_.loop_nodes;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    auto& n = nodes_[loop[i]];
    forged_parent_[loop[i]] = n.parent.value_or("");
    n.parent = loop[(i + 1) % loop.size()];
  }
}

void WsnSim::restore_loop() {
  for (const auto& [id, original] : forged_parent_) {
    auto& n = nodes_[id];
    if (original.empty()) {
      n.parent.reset();
    } else {
      n.parent = original;
    }
  }
  forged_parent_.clear();
}

bool WsnSim::reaches_base(const std::string& id) const {
  std::set<std::string> seen;
  std::string cur = id;
  while (cur != config_.base_station) {
    if (!seen.insert(cur).second) return false;
    const auto& n = nodes_.at(cur);
    if (!n.participating() || !n.parent) return false;
    cur = *n.parent;
  }
  return true;
}

void WsnSim::repair_routes() {
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& [id, n] : nodes_) {
      if (id == config_.base_station || !n.participating() || forged_parent_.count(id)) continue;
      if (reaches_base(id)) continue;
      // Pick the neighbour with the shortest working route; ties -> lowest id.
      std::optional<std::string> best;
      std::size_t best_len = 0;
      for (const auto& nb : n.neighbors) {
        const auto& cand = nodes_.at(nb);
        if (nb != config_.base_station && (!cand.participating() || !reaches_base(nb))) continue;
        std::size_t len = 1;
        if (nb != config_.base_station) {
          auto path = route_path(nb);
          if (std::find(path.begin(), path.end(), id) != path.end()) continue;
          len = path.size();
        }
        if (!best || len < best_len) {
          best = nb;
          best_len = len;
        }
      }
      if (best && n.parent != best) {
        n.parent = best;
        changed = true;
      }
    }
  }
}

std::vector<std::string> WsnSim::route_path(const std::string& node_id) const {
  const auto& start = node(node_id);
  if (node_id != config_.base_station && !start.alive) {
    throw UnknownNode("wsn node '" + node_id + "' is not alive");
  }
  std::vector<std::string> path;
  std::set<std::string> seen;
  std::string cur = node_id;
  while (true) {
    if (!seen.insert(cur).second) throw LoopDetected("routing loop through '" + cur + "'");
    path.push_back(cur);
    if (cur == config_.base_station) break;
    const auto& n = nodes_.at(cur);
    if (!n.parent) break;
    cur = *n.parent;
  }
  return path;
}

void WsnSim::reprogram(const std::string& id) {
  node(id);
  if (attack_ && attack_->attacker_node == id) {
    attacker_reprogrammed_ = true;
    end_attack(now_us_, "reprogrammed");
  }
}

void WsnSim::put_to_sleep(const std::string& id) {
  node(id);
  nodes_[id].asleep = true;
  if (attack_ && attack_->attacker_node == id) end_attack(now_us_, "asleep");
}

void WsnSim::isolate(const std::string& id) {
  node(id);
  auto& n = nodes_[id];
  for (const auto& nb : n.neighbors) nodes_[nb].neighbors.erase(id);
  n.neighbors.clear();
  n.isolated = true;
  if (attack_ && attack_->attacker_node == id) end_attack(now_us_, "isolated");
}

WsnTickObservation WsnSim::step(TimeUs dt_us) {
  if (dt_us <= 0) throw Error("wsn step needs dt_us > 0");
  const TimeUs t0 = now_us_;
  const TimeUs t1 = now_us_ + dt_us;
  WsnTickObservation obs;
  obs.t_end_us = t1;

  update_attack_phase(t0);
  repair_routes();

  std::map<std::string, std::int64_t> tx, rx;
  std::vector<Batch> current;
  auto data_lost = [this](const Batch& b, std::int64_t n) {
    if (b.kind == WsnPacketKind::Data) nodes_[b.origin].data_dropped += n;
  };

  for (auto& [id, n] : nodes_) {
    if (id == config_.base_station || !n.participating()) continue;
    const std::int64_t data = count_between(n.gen_rate_pps, 0, t0, t1);
    if (data > 0) {
      n.originated += data;
      n.data_originated += data;
      obs.originated[id] += data;
      current.push_back({id, WsnPacketKind::Data, id, data, config_.ttl, 0});
    }
  }

  if (attack_running_) {
    const auto& a = *attack_;
    const std::int64_t n_att = count_between(a.attack_rate_pps, a.start_us, t0, std::min(t1, a.stop_us));
    auto& attacker = nodes_[a.attacker_node];
    if (n_att > 0) {
      WsnPacketKind kind = WsnPacketKind::BroadcastRouting;
      if (a.mode == WsnAttackMode::RreqFlood) kind = WsnPacketKind::Rreq;
      if (a.mode == WsnAttackMode::ForgedRrepLoop) kind = WsnPacketKind::Rrep;
      attacker.originated += n_att;
      obs.originated[a.attacker_node] += n_att;
      current.push_back({a.attacker_node, kind, a.attacker_node, n_att, config_.ttl, 0});

      if (kind != WsnPacketKind::Rrep) {
        // Broadcast-style packets are heard by every neighbour; the parent's
        // reception is counted when it relays them.
        for (const auto& nb : attacker.neighbors) {
          if (nb == attacker.parent || !nodes_[nb].participating()) continue;
          rx[nb] += n_att;
        }
      }
      if (kind == WsnPacketKind::BroadcastRouting) {
        for (const auto& nb : attacker.neighbors) {
          auto& fooled = nodes_[nb];
          if (nb == config_.base_station || !fooled.participating()) continue;
          std::int64_t flips = 0;
          for (std::int64_t i = 0; i < n_att; ++i) {
            if (rng_.uniform() < config_.fool_prob) ++flips;
          }
          if (flips == 0) continue;
          // Each parent flip is announced to all neighbours.
          fooled.originated += flips;
          obs.originated[nb] += flips;
          tx[nb] += flips;
          for (const auto& nb2 : fooled.neighbors) {
            if (nodes_[nb2].participating()) rx[nb2] += flips;
          }
        }
      }
    }
  }

  std::map<std::string, std::int64_t> capacity_left;
  for (const auto& [id, n] : nodes_) {
    capacity_left[id] = count_between(config_.capacity_pps, 0, t0, t1);
  }

  while (!current.empty()) {
    std::map<std::string, std::vector<Batch>> arrivals;
    for (auto& b : current) {
      auto& sender = nodes_[b.at];
      if (b.hops > 0) sender.forwarded += b.count;
      tx[b.at] += b.count;
      transmissions_ += b.count;
      obs.transmissions += b.count;
      if (!sender.parent) {
        data_lost(b, b.count);
        continue;
      }
      const std::string parent = *sender.parent;
      auto& p = nodes_[parent];
      b.ttl -= 1;
      b.hops += 1;
      if (parent == config_.base_station) {
        rx[parent] += b.count;
        server_arrivals_ += b.count;
        obs.server_arrivals += b.count;
        if (b.kind == WsnPacketKind::Data) nodes_[b.origin].data_delivered += b.count;
        continue;
      }
      if (!p.participating()) {
        data_lost(b, b.count);
        continue;
      }
      rx[parent] += b.count;
      if (b.ttl <= 0) {
        data_lost(b, b.count);
        continue;
      }
      b.at = parent;
      arrivals[parent].push_back(std::move(b));
    }

    std::vector<Batch> next;
    for (auto& [id, batches] : arrivals) {
      std::vector<std::int64_t> demand;
      demand.reserve(batches.size());
      for (const auto& b : batches) demand.push_back(b.count);
      auto granted = apportion(capacity_left[id], demand);
      for (std::size_t i = 0; i < batches.size(); ++i) {
        capacity_left[id] -= granted[i];
        const std::int64_t refused = batches[i].count - granted[i];
        if (refused > 0) {
          nodes_[id].capacity_drops += refused;
          data_lost(batches[i], refused);
        }
        if (granted[i] > 0) {
          batches[i].count = granted[i];
          next.push_back(std::move(batches[i]));
        }
      }
    }
    current = std::move(next);
  }

  if (config_.proxy_surge_pps > 0) {
    const TimeUs a = std::max(t0, config_.proxy_surge_start_us);
    const TimeUs b = std::min(t1, config_.proxy_surge_stop_us);
    const auto extra = count_between(config_.proxy_surge_pps, config_.proxy_surge_start_us, a, b);
    server_arrivals_ += extra;
    obs.server_arrivals += extra;
  }

  for (auto& [id, n] : nodes_) {
    if (id == config_.base_station) continue;
    const std::int64_t t = tx.count(id) ? tx[id] : 0;
    const std::int64_t r = rx.count(id) ? rx[id] : 0;
    if (t == 0 && r == 0) continue;
    const double delta = battery_drain_model(config_.energy, t, 0, r);
    n.energy_used += delta;
    n.received += r;
    if (!n.alive) continue;
    n.battery_units = std::max(0.0, n.battery_units - delta);
    if (n.battery_units <= 0) {
      n.alive = false;
      obs.died.push_back(id);
    }
  }
  // Base station reception is tracked for completeness only; it is mains powered.
  if (rx.count(config_.base_station)) nodes_[config_.base_station].received += rx[config_.base_station];

  now_us_ = t1;
  return obs;
}

std::string WsnSim::digest() const {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << now_us_ << " arrivals=" << server_arrivals_ << " tx=" << transmissions_
     << " attack_running=" << attack_running_ << " ended=" << attack_ended_at_.value_or(-1) << '\n';
  for (const auto& [id, n] : nodes_) {
    os << id << " parent=" << n.parent.value_or("-") << " bat=" << n.battery_units
       << " alive=" << n.alive << " asleep=" << n.asleep << " iso=" << n.isolated
       << " orig=" << n.originated << " dorig=" << n.data_originated
       << " ddel=" << n.data_delivered << " ddrop=" << n.data_dropped << " fwd=" << n.forwarded
       << " rx=" << n.received << " capdrop=" << n.capacity_drops << " nb=";
    for (const auto& nb : n.neighbors) os << nb << ',';
    os << '\n';
  }
  return os.str();
}

}  // namespace gridsiem
