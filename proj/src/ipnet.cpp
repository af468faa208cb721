#include "gridsiem/ipnet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridsiem/apportion.hpp"
#include "gridsiem/errors.hpp"

namespace gridsiem {

std::string_view to_string(FlowKind k) {
  switch (k) {
    case FlowKind::Monitoring: return "monitoring";
    case FlowKind::Web: return "web";
    case FlowKind::Attack: return "attack";
  }
  return "?";
}

std::optional<FlowKind> parse_flow_kind(std::string_view s) {
  if (s == "monitoring") return FlowKind::Monitoring;
  if (s == "web") return FlowKind::Web;
  if (s == "attack") return FlowKind::Attack;
  return std::nullopt;
}

namespace {

bool is_tcp(FlowKind k) { return k != FlowKind::Monitoring; }

}  // namespace

IpNetSim::IpNetSim(IpNetConfig config) : config_(std::move(config)) {
  for (const auto& [id, cap] : config_.routers) {
    if (cap <= 0) throw Error("router '" + id + "' needs a positive capacity");
    Router r;
    r.router_id = id;
    r.capacity_pps = cap;
    routers_[id] = r;
    topo_.nodes.push_back(id);
  }
  for (const auto& [a, b] : config_.links) {
    if (!routers_.count(a)) throw UnknownNode("link names unknown router '" + a + "'");
    if (!routers_.count(b)) throw UnknownNode("link names unknown router '" + b + "'");
    routers_[a].neighbors.insert(b);
    routers_[b].neighbors.insert(a);
    topo_.edges.emplace_back(a, b);
  }
  for (const auto& [host, r] : config_.hosts) {
    if (!routers_.count(r)) throw UnknownNode("host '" + host + "' attaches to unknown router '" + r + "'");
    host_router_[host] = r;
  }
  for (const auto& s : config_.servers) {
    if (!routers_.count(s.router)) {
      throw UnknownNode("server '" + s.id + "' attaches to unknown router '" + s.router + "'");
    }
    ServerState st;
    st.server_id = s.id;
    st.router = s.router;
    st.half_open_capacity = s.half_open_capacity;
    st.syn_timeout_us = s.syn_timeout_us;
    servers_[s.id] = st;
    host_router_[s.id] = s.router;
  }
  for (const auto& spec : config_.flows) {
    Flow f;
    f.flow_id = spec.id;
    f.src = spec.src;
    f.dst = spec.dst;
    f.rate_pps = spec.rate_pps;
    f.kind = spec.kind;
    const auto a = router_of(spec.src);
    const auto b = router_of(spec.dst);
    if (config_.presplit && spec.kind == FlowKind::Monitoring && a != b) {
      for (auto& p : compute_disjoint_paths(topo_, a, b, 2)) {
        f.paths.push_back(FlowPath{.routers = std::move(p), .weight = 0.5});
      }
    } else {
      auto p = shortest_path(topo_, a, b);
      if (p.empty()) throw PathInvalid("no route for flow '" + spec.id + "'");
      f.paths.push_back(FlowPath{.routers = std::move(p)});
    }
    flows_.push_back(std::move(f));
  }
}

std::string IpNetSim::router_of(const std::string& host) const {
  auto it = host_router_.find(host);
  if (it == host_router_.end()) throw UnknownNode("unknown host '" + host + "'");
  return it->second;
}

const Flow& IpNetSim::flow(const std::string& flow_id) const {
  for (const auto& f : flows_) {
    if (f.flow_id == flow_id) return f;
  }
  throw UnknownNode("unknown flow '" + flow_id + "'");
}

Flow& IpNetSim::mutable_flow(const std::string& flow_id) {
  return const_cast<Flow&>(static_cast<const IpNetSim*>(this)->flow(flow_id));
}

const ServerState& IpNetSim::server(const std::string& id) const {
  auto it = servers_.find(id);
  if (it == servers_.end()) throw UnknownNode("unknown server '" + id + "'");
  return it->second;
}

const Router& IpNetSim::router(const std::string& id) const {
  auto it = routers_.find(id);
  if (it == routers_.end()) throw UnknownNode("unknown router '" + id + "'");
  return it->second;
}

void IpNetSim::launch_ddos(const DdosConfig& cfg) {
  if (ddos_) throw Error("a DDoS attack is already configured");
  if (cfg.agent_ids.empty()) throw Error("DDoS needs at least one agent");
  if (cfg.syn_rate_per_agent_pps <= 0) throw Error("DDoS agent rate must be positive");
  if (cfg.stop_us <= cfg.start_us) throw Error("DDoS stop must follow start");
  router_of(cfg.master_id);
  if (!servers_.count(cfg.target_server)) {
    throw UnknownNode("unknown target server '" + cfg.target_server + "'");
  }
  const auto dst_router = router_of(cfg.target_server);
  for (const auto& agent : cfg.agent_ids) {
    auto p = shortest_path(topo_, router_of(agent), dst_router);
    if (p.empty()) throw PathInvalid("agent '" + agent + "' cannot reach the target");
    Flow f;
    f.flow_id = "ddos:" + agent;
    f.src = agent;
    f.dst = cfg.target_server;
    f.rate_pps = cfg.syn_rate_per_agent_pps;
    f.kind = FlowKind::Attack;
    f.active_from_us = cfg.start_us;
    f.active_until_us = cfg.stop_us;
    f.paths.push_back(FlowPath{.routers = std::move(p)});
    flows_.push_back(std::move(f));
  }
  ddos_ = cfg;
}

void IpNetSim::validate_paths(const Flow& f, const std::vector<Path>& paths) const {
  const auto a = router_of(f.src);
  const auto b = router_of(f.dst);
  for (const auto& p : paths) {
    if (p.empty() || p.front() != a || p.back() != b) {
      throw PathInvalid("path does not join '" + a + "' to '" + b + "'");
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!routers_.count(p[i])) throw PathInvalid("path names unknown router '" + p[i] + "'");
      if (!seen.insert(p[i]).second) throw PathInvalid("path revisits '" + p[i] + "'");
      if (i > 0 && !topo_.adjacent(p[i - 1], p[i])) {
        throw PathInvalid("no link between '" + p[i - 1] + "' and '" + p[i] + "'");
      }
    }
  }
  if (!interior_disjoint(paths)) throw PathInvalid("paths share an interior router");
}

void IpNetSim::split_flow(const std::string& flow_id, const std::vector<Path>& paths,
                          const std::vector<double>& weights) {
  Flow& f = mutable_flow(flow_id);
  if (paths.empty() || paths.size() != weights.size()) {
    throw PathInvalid("need one weight per path");
  }
  double sum = 0;
  for (double w : weights) {
    if (!(w > 0)) throw PathInvalid("weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw PathInvalid("weights must sum to 1");
  validate_paths(f, paths);
  f.paths.clear();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    f.paths.push_back(FlowPath{.routers = paths[i], .weight = weights[i]});
  }
}

void IpNetSim::disable_path(const std::string& flow_id, std::size_t path_index) {
  Flow& f = mutable_flow(flow_id);
  if (path_index >= f.paths.size()) throw PathInvalid("no such path");
  f.paths[path_index].enabled = false;
  f.paths[path_index].weight = 0;
  double sum = 0;
  for (const auto& p : f.paths) {
    if (p.enabled) sum += p.weight;
  }
  for (auto& p : f.paths) {
    p.share = 0;
    if (p.enabled) p.weight /= sum;
  }
}

void IpNetSim::add_path(const std::string& flow_id, const Path& path) {
  Flow& f = mutable_flow(flow_id);
  std::vector<Path> live{path};
  for (const auto& p : f.paths) {
    if (p.enabled) live.push_back(p.routers);
  }
  validate_paths(f, live);
  f.paths.push_back(FlowPath{.routers = path});
  const double w = 1.0 / static_cast<double>(live.size());
  for (auto& p : f.paths) {
    p.share = 0;
    if (p.enabled) p.weight = w;
  }
}

// Hands out n packets one at a time to the enabled path furthest behind its
// weighted share of everything assigned since the path set last changed, so
// per-path totals never drift more than one packet from weight * total.
std::vector<std::int64_t> IpNetSim::split(Flow& f, std::int64_t n) const {
  std::vector<std::int64_t> out(f.paths.size(), 0);
  std::vector<std::size_t> live;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < f.paths.size(); ++i) {
    if (f.paths[i].enabled) live.push_back(i);
    total += f.paths[i].share;
  }
  if (live.empty()) return out;
  if (live.size() == 1) {
    out[live[0]] = n;
    f.paths[live[0]].share += n;
    return out;
  }
  for (std::int64_t k = 0; k < n; ++k) {
    ++total;
    std::size_t best = live[0];
    double best_deficit = -1e300;
    for (auto i : live) {
      const double deficit = f.paths[i].weight * static_cast<double>(total) -
                             static_cast<double>(f.paths[i].share);
      if (deficit > best_deficit + 1e-12) {
        best_deficit = deficit;
        best = i;
      }
    }
    ++out[best];
    ++f.paths[best].share;
  }
  return out;
}

IpTickObservation IpNetSim::step(TimeUs dt_us) {
  if (dt_us <= 0) throw Error("dt must be positive");
  const TimeUs t0 = now_us_;
  const TimeUs t1 = now_us_ + dt_us;
  IpTickObservation obs;
  obs.t_end_us = t1;

  for (auto& [id, s] : servers_) {
    s.half_open -= s.completing;
    s.handshakes_completed += s.completing;
    s.completing = 0;
    while (!s.pending.empty() && s.pending.front().first <= t1) {
      s.half_open -= s.pending.front().second;
      s.expired += s.pending.front().second;
      s.pending.pop_front();
    }
  }

  if (ddos_ && !instructs_sent_ && ddos_->start_us < t1) {
    for (const auto& agent : ddos_->agent_ids) {
      obs.events.push_back(SimEvent{ddos_->start_us, ddos_->master_id, "ddos_instruct", Severity::Info,
                                    Attrs{{"master", ddos_->master_id},
                                          {"agent", agent},
                                          {"target", ddos_->target_server}}});
    }
    instructs_sent_ = true;
  }

  struct Batch {
    std::size_t flow;
    std::size_t path;
    std::int64_t count;
  };
  std::vector<Batch> live;
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    Flow& f = flows_[i];
    const TimeUs a = std::max(t0, f.active_from_us);
    const TimeUs b = f.active_until_us ? std::min(t1, *f.active_until_us) : t1;
    const TimeUs ref = f.kind == FlowKind::Attack ? f.active_from_us : 0;
    const std::int64_t n = count_between(f.rate_pps, ref, a, b);
    if (n == 0) continue;
    f.offered += n;
    const auto shares = split(f, n);
    std::int64_t routed = 0;
    for (std::size_t p = 0; p < shares.size(); ++p) {
      if (shares[p] == 0) continue;
      f.paths[p].injected += shares[p];
      routed += shares[p];
      live.push_back({i, p, shares[p]});
    }
    f.unroutable += n - routed;
  }

  std::map<std::string, std::int64_t> budget;
  for (const auto& [id, r] : routers_) {
    budget[id] = count_between(r.capacity_pps, 0, t0, t1);
    obs.router_budget[id] = budget[id];
    obs.router_forwarded[id] = 0;
  }

  std::vector<Batch> arrived;
  for (std::size_t hop = 0; !live.empty(); ++hop) {
    std::map<std::string, std::vector<std::size_t>> at;
    for (std::size_t j = 0; j < live.size(); ++j) {
      at[flows_[live[j].flow].paths[live[j].path].routers[hop]].push_back(j);
    }
    std::vector<Batch> next;
    for (const auto& [rid, idx] : at) {
      Router& r = routers_[rid];
      std::vector<std::int64_t> demands;
      for (auto j : idx) {
        demands.push_back(live[j].count);
        if (is_tcp(flows_[live[j].flow].kind)) r.syn += live[j].count;
      }
      const auto granted = apportion(budget[rid], demands);
      for (std::size_t m = 0; m < idx.size(); ++m) {
        const Batch& bt = live[idx[m]];
        const std::int64_t g = granted[m];
        budget[rid] -= g;
        r.forwarded += g;
        obs.router_forwarded[rid] += g;
        r.dropped += bt.count - g;
        flows_[bt.flow].paths[bt.path].dropped += bt.count - g;
        if (g == 0) continue;
        if (hop + 1 < flows_[bt.flow].paths[bt.path].routers.size()) {
          next.push_back({bt.flow, bt.path, g});
        } else {
          arrived.push_back({bt.flow, bt.path, g});
        }
      }
    }
    live = std::move(next);
  }

  std::map<std::string, std::vector<std::size_t>> syn_at_server;
  for (std::size_t j = 0; j < arrived.size(); ++j) {
    Flow& f = flows_[arrived[j].flow];
    f.delivered += arrived[j].count;
    f.paths[arrived[j].path].delivered += arrived[j].count;
    if (is_tcp(f.kind) && servers_.count(f.dst)) syn_at_server[f.dst].push_back(j);
  }
  for (const auto& [sid, idx] : syn_at_server) {
    ServerState& s = servers_[sid];
    std::vector<std::int64_t> demands;
    for (auto j : idx) demands.push_back(arrived[j].count);
    const auto accepted = apportion(s.half_open_capacity - s.half_open, demands);
    for (std::size_t m = 0; m < idx.size(); ++m) {
      const Batch& bt = arrived[idx[m]];
      const Flow& f = flows_[bt.flow];
      const std::int64_t acc = accepted[m];
      s.syn_received += bt.count;
      s.syn_rejected += bt.count - acc;
      s.half_open += acc;
      if (acc == 0) continue;
      // SYN-ACK goes back along the same routers; only web clients answer it.
      for (const auto& rid : f.paths[bt.path].routers) {
        routers_[rid].synack += acc;
        if (f.kind == FlowKind::Web) routers_[rid].ack += acc;
      }
      if (f.kind == FlowKind::Web) {
        s.completing += acc;
      } else {
        s.pending.emplace_back(t1 + s.syn_timeout_us, acc);
      }
    }
    if (s.half_open >= s.half_open_capacity && !s.first_saturated_us) s.first_saturated_us = t1;
  }

  now_us_ = t1;
  return obs;
}

std::string IpNetSim::digest() const {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << now_us_ << '\n';
  for (const auto& [id, r] : routers_) {
    os << id << " fwd=" << r.forwarded << " drop=" << r.dropped << " syn=" << r.syn
       << " synack=" << r.synack << " ack=" << r.ack << '\n';
  }
  for (const auto& [id, s] : servers_) {
    os << id << " half_open=" << s.half_open << " rx=" << s.syn_received << " rej=" << s.syn_rejected
       << " done=" << s.handshakes_completed << " exp=" << s.expired << '\n';
  }
  for (const auto& f : flows_) {
    os << f.flow_id << " offered=" << f.offered << " delivered=" << f.delivered;
    for (const auto& p : f.paths) {
      os << " [";
      for (const auto& r : p.routers) os << r << ' ';
      os << "w=" << p.weight << " on=" << p.enabled << " inj=" << p.injected
         << " del=" << p.delivered << ']';
    }
    os << '\n';
  }
  return os.str();
}

IpNetConfig ipnet_fixture_config() {
  IpNetConfig c;
  c.routers = {{"gw", 10000}, {"r1", 10000}, {"r2", 1000},  {"r3", 10000},
               {"r4", 10000}, {"r5", 10000}, {"r6", 10000}};
  for (const auto& [a, b] : six_router_fixture().edges) c.links.emplace_back(a, b);
  c.links.emplace_back("gw", "r2");
  c.hosts = {{"pmu1", "r1"},    {"pdc1", "r6"},   {"client1", "gw"}, {"master", "gw"},
             {"agent1", "gw"},  {"agent2", "gw"}, {"agent3", "gw"},  {"agent4", "gw"}};
  c.servers = {IpServerSpec{.id = "websrv", .router = "r3"}};
  c.flows = {IpFlowSpec{"mon1", "pmu1", "pdc1", 50, FlowKind::Monitoring},
             IpFlowSpec{"web1", "client1", "websrv", 20, FlowKind::Web}};
  return c;
}

}  // namespace gridsiem
