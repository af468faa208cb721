#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridsiem/disjoint_paths.hpp"
#include "gridsiem/events.hpp"

namespace gridsiem {

struct Router {
  std::string router_id;
  double capacity_pps = 0;
  std::set<std::string> neighbors;

  // Cumulative counters. Handshake packets are counted as they arrive at the
  // router, before any capacity drop.
  std::int64_t forwarded = 0;
  std::int64_t dropped = 0;
  std::int64_t syn = 0;
  std::int64_t synack = 0;
  std::int64_t ack = 0;
};

struct ServerState {
  std::string server_id;
  std::string router;
  std::int64_t half_open = 0;
  std::int64_t half_open_capacity = 1024;
  TimeUs syn_timeout_us = 3 * kUsPerSecond;

  std::int64_t syn_received = 0;
  std::int64_t syn_rejected = 0;          // table full
  std::int64_t handshakes_completed = 0;
  std::int64_t expired = 0;
  std::optional<TimeUs> first_saturated_us;

  // Attack entries waiting for their timeout: (expiry, count).
  std::deque<std::pair<TimeUs, std::int64_t>> pending;
  // Web entries accepted this tick; their ACK arrives and frees them next tick.
  std::int64_t completing = 0;
};

enum class FlowKind { Monitoring, Web, Attack };

std::string_view to_string(FlowKind k);
std::optional<FlowKind> parse_flow_kind(std::string_view s);

struct FlowPath {
  Path routers;
  double weight = 1.0;
  bool enabled = true;
  std::int64_t injected = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t share = 0;  // packets assigned since the path set last changed
};

struct Flow {
  std::string flow_id;
  std::string src;  // host id
  std::string dst;  // host id
  double rate_pps = 0;
  FlowKind kind = FlowKind::Monitoring;
  std::vector<FlowPath> paths;
  TimeUs active_from_us = 0;
  std::optional<TimeUs> active_until_us;

  std::int64_t offered = 0;
  std::int64_t delivered = 0;
  std::int64_t unroutable = 0;  // offered while every path was disabled
};

struct DdosConfig {
  std::string master_id;
  std::set<std::string> agent_ids;
  std::string target_server;
  double syn_rate_per_agent_pps = 0;
  TimeUs start_us = 0;
  TimeUs stop_us = 0;
};

struct IpFlowSpec {
  std::string id;
  std::string src;
  std::string dst;
  double rate_pps = 0;
  FlowKind kind = FlowKind::Monitoring;
};

struct IpServerSpec {
  std::string id;
  std::string router;
  std::int64_t half_open_capacity = 1024;
  TimeUs syn_timeout_us = 3 * kUsPerSecond;
};

struct IpNetConfig {
  std::vector<std::pair<std::string, double>> routers;  // id, capacity_pps
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<std::pair<std::string, std::string>> hosts;  // host id, router
  std::vector<IpServerSpec> servers;
  std::vector<IpFlowSpec> flows;
  bool presplit = false;  // monitoring flows start on two disjoint paths
};

struct IpTickObservation {
  TimeUs t_end_us = 0;
  std::map<std::string, std::int64_t> router_forwarded;  // this tick
  std::map<std::string, std::int64_t> router_budget;     // capacity this tick
  std::vector<SimEvent> events;
};

/// Router graph carrying monitoring, web and attack flows; packets cross the
/// network within one tick, routers drop what exceeds their per-tick budget.
class IpNetSim {
 public:
  explicit IpNetSim(IpNetConfig config);

  IpTickObservation step(TimeUs dt_us);

  /// Throws UnknownNode for ids not in the network, Error for an empty agent
  /// set or non-positive rate.
  void launch_ddos(const DdosConfig& cfg);

  /// Replaces the flow's path set. Throws PathInvalid when a path is not a
  /// loop-free src->dst walk over existing links, when paths overlap, or when
  /// weights are not positive and summing to 1.
  void split_flow(const std::string& flow_id, const std::vector<Path>& paths,
                  const std::vector<double>& weights);

  /// Disables one path and renormalises the survivors' weights. The path keeps
  /// its counters but carries nothing from the next tick on.
  void disable_path(const std::string& flow_id, std::size_t path_index);

  /// Adds an enabled path; weights of enabled paths are reset to equal shares.
  void add_path(const std::string& flow_id, const Path& path);

  const Topology& topology() const { return topo_; }
  const std::map<std::string, Router>& routers() const { return routers_; }
  const std::map<std::string, ServerState>& servers() const { return servers_; }
  const std::vector<Flow>& flows() const { return flows_; }
  const Flow& flow(const std::string& flow_id) const;
  const ServerState& server(const std::string& id) const;
  const Router& router(const std::string& id) const;
  std::string router_of(const std::string& host) const;
  TimeUs now() const { return now_us_; }
  const std::optional<DdosConfig>& ddos() const { return ddos_; }

  std::string digest() const;

 private:
  Flow& mutable_flow(const std::string& flow_id);
  void validate_paths(const Flow& f, const std::vector<Path>& paths) const;
  std::vector<std::int64_t> split(Flow& f, std::int64_t n) const;

  IpNetConfig config_;
  Topology topo_;
  TimeUs now_us_ = 0;
  std::map<std::string, Router> routers_;
  std::map<std::string, std::string> host_router_;
  std::map<std::string, ServerState> servers_;
  std::vector<Flow> flows_;
  std::optional<DdosConfig> ddos_;
  bool instructs_sent_ = false;
};

/// Six core routers (two corridors with cross links) plus an edge gateway:
/// PMU on r1, PDC on r6, web server on r3, client and DDoS hosts behind gw.
/// r2 is the shared router with a 1000 pps budget.
IpNetConfig ipnet_fixture_config();

}  // namespace gridsiem
