#include "gridsiem/disjoint_paths.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>

#include "gridsiem/errors.hpp"

namespace gridsiem {

bool Topology::has_node(const std::string& id) const {
  return std::find(nodes.begin(), nodes.end(), id) != nodes.end();
}

bool Topology::adjacent(const std::string& a, const std::string& b) const {
  for (const auto& [u, v] : edges) {
    if ((u == a && v == b) || (u == b && v == a)) return true;
  }
  return false;
}

std::vector<std::string> Topology::neighbors(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& [u, v] : edges) {
    if (u == id) out.push_back(v);
    if (v == id) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Topology six_router_fixture() {
  Topology t;
  t.nodes = {"r1", "r2", "r3", "r4", "r5", "r6"};
  t.edges = {{"r1", "r2"}, {"r2", "r3"}, {"r3", "r6"}, {"r1", "r4"}, {"r4", "r5"},
             {"r5", "r6"}, {"r2", "r4"}, {"r3", "r5"}};
  return t;
}

bool interior_disjoint(const std::vector<Path>& paths) {
  std::set<std::string> seen;
  for (const auto& p : paths) {
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
      if (!seen.insert(p[i]).second) return false;
    }
  }
  return true;
}

namespace {

struct Arc {
  int to;
  int cap;
  int cost;
  int rev;
};

class FlowGraph {
 public:
  explicit FlowGraph(int n) : adj_(static_cast<std::size_t>(n)) {}

  void add(int from, int to, int cap, int cost) {
    adj_[from].push_back({to, cap, cost, static_cast<int>(adj_[to].size())});
    adj_[to].push_back({from, 0, -cost, static_cast<int>(adj_[from].size()) - 1});
  }

  // One augmenting unit along the cheapest residual path (Bellman-Ford, so
  // negative residual arcs are fine). Returns false when sink is unreachable.
  bool augment(int source, int sink) {
    const int n = static_cast<int>(adj_.size());
    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<int> dist(n, kInf), prev_node(n, -1), prev_arc(n, -1);
    dist[source] = 0;
    for (int round = 0; round < n; ++round) {
      bool changed = false;
      for (int u = 0; u < n; ++u) {
        if (dist[u] == kInf) continue;
        for (int i = 0; i < static_cast<int>(adj_[u].size()); ++i) {
          const auto& a = adj_[u][i];
          if (a.cap > 0 && dist[u] + a.cost < dist[a.to]) {
            dist[a.to] = dist[u] + a.cost;
            prev_node[a.to] = u;
            prev_arc[a.to] = i;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[sink] == kInf) return false;
    for (int v = sink; v != source; v = prev_node[v]) {
      auto& a = adj_[prev_node[v]][prev_arc[v]];
      a.cap -= 1;
      adj_[v][a.rev].cap += 1;
    }
    return true;
  }

  std::vector<std::vector<Arc>>& adj() { return adj_; }

 private:
  std::vector<std::vector<Arc>> adj_;
};

}  // namespace

std::vector<Path> compute_disjoint_paths(const Topology& topo, const std::string& src,
                                         const std::string& dst, int k,
                                         const std::set<std::string>& excluded) {
  if (k < 1) throw InsufficientDisjointness("k must be at least 1");
  if (!topo.has_node(src)) throw UnknownNode("unknown router '" + src + "'");
  if (!topo.has_node(dst)) throw UnknownNode("unknown router '" + dst + "'");
  if (src == dst) throw InsufficientDisjointness("src and dst must differ");
  if (excluded.count(src) || excluded.count(dst)) {
    throw InsufficientDisjointness("an endpoint is excluded");
  }

  std::vector<std::string> names = topo.nodes;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);

  auto in = [](int v) { return 2 * v; };
  auto out = [](int v) { return 2 * v + 1; };
  FlowGraph g(static_cast<int>(2 * names.size()));
  for (const auto& name : names) {
    if (excluded.count(name)) continue;
    const int v = index[name];
    const int cap = (name == src || name == dst) ? k : 1;
    g.add(in(v), out(v), cap, 0);
  }
  for (const auto& name : names) {
    if (excluded.count(name)) continue;
    for (const auto& nb : topo.neighbors(name)) {
      if (excluded.count(nb) || !index.count(nb)) continue;
      g.add(out(index[name]), in(index[nb]), 1, 1);
    }
  }

  const int source = in(index[src]);
  const int sink = out(index[dst]);
  for (int i = 0; i < k; ++i) {
    if (!g.augment(source, sink)) {
      throw InsufficientDisjointness("only " + std::to_string(i) + " disjoint path(s) between '" +
                                     src + "' and '" + dst + "', " + std::to_string(k) +
                                     " requested");
    }
  }

  // Peel paths off the flow: follow saturated forward arcs from the source.
  auto& adj = g.adj();
  auto used = [](const Arc& a, const std::vector<std::vector<Arc>>& all) {
    return a.cost >= 0 && all[a.to][a.rev].cap > 0 && a.cap == 0;
  };
  std::vector<Path> paths;
  for (int p = 0; p < k; ++p) {
    Path path{src};
    int node = index[src];
    while (names[node] != dst) {
      int next = -1;
      for (auto& a : adj[out(node)]) {
        if (a.to % 2 == 0 && used(a, adj)) {
          // Consume this unit so the next path picks a different arc.
          a.cap += 1;
          adj[a.to][a.rev].cap -= 1;
          next = a.to / 2;
          break;
        }
      }
      if (next < 0) throw InsufficientDisjointness("flow decomposition failed");
      path.push_back(names[next]);
      node = next;
    }
    paths.push_back(std::move(path));
  }
  std::sort(paths.begin(), paths.end(), [](const Path& a, const Path& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return paths;
}

Path shortest_path(const Topology& topo, const std::string& src, const std::string& dst,
                   const std::set<std::string>& excluded) {
  if (!topo.has_node(src) || !topo.has_node(dst) || excluded.count(src) || excluded.count(dst)) {
    return {};
  }
  // BFS over sorted neighbours; the first time a node is reached it is via the
  // lexicographically smallest shortest prefix.
  std::map<std::string, std::string> parent;
  std::deque<std::string> queue{src};
  parent[src] = "";
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    if (cur == dst) break;
    for (const auto& nb : topo.neighbors(cur)) {
      if (excluded.count(nb) || parent.count(nb)) continue;
      parent[nb] = cur;
      queue.push_back(nb);
    }
  }
  if (!parent.count(dst)) return {};
  Path path;
  for (std::string cur = dst; !cur.empty(); cur = parent[cur]) path.push_back(cur);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace gridsiem
