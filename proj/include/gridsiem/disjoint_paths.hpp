#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gridsiem {

using Path = std::vector<std::string>;

/// Undirected router graph.
struct Topology {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;

  bool has_node(const std::string& id) const;
  bool adjacent(const std::string& a, const std::string& b) const;
  std::vector<std::string> neighbors(const std::string& id) const;  // sorted
};

/// k pairwise interior-node-disjoint src->dst paths of minimum total hop
/// count. Routers in `excluded` are treated as absent. Paths come back
/// ordered by (length, lexicographic).
///
/// Works on the vertex-split graph (every interior router becomes an in/out
/// pair joined by a unit-capacity arc) and pushes k units of flow with
/// successive shortest augmenting paths, which yields a minimum-cost set of
/// disjoint paths in one pass (the Suurballe construction generalised to k).
///
/// Throws InsufficientDisjointness when fewer than k such paths exist and
/// UnknownNode for ids outside the topology.
std::vector<Path> compute_disjoint_paths(const Topology& topo, const std::string& src,
                                         const std::string& dst, int k,
                                         const std::set<std::string>& excluded = {});

/// Plain shortest path by hop count, lexicographically smallest among ties.
/// Empty when dst is unreachable.
Path shortest_path(const Topology& topo, const std::string& src, const std::string& dst,
                   const std::set<std::string>& excluded = {});

/// True when no two paths share a node other than their endpoints.
bool interior_disjoint(const std::vector<Path>& paths);

/// The six-router fixture: two parallel three-hop corridors r1-r2-r3-r6 and
/// r1-r4-r5-r6, with cross links r2-r4 and r3-r5.
Topology six_router_fixture();

}  // namespace gridsiem
