#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bwpred/csv.hpp"

namespace bwpred {

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NodeKind { Router, Host };

struct Node {
  std::string id;
  NodeKind kind;
};

struct Link {
  std::string id;
  int a = -1;          // node index
  int b = -1;          // node index
  double capacity_bps = 0.0;
  double latency_s = 0.0;
};

/// One traversal step: a link plus the direction of travel (a->b or b->a).
struct PathHop {
  int link = -1;
  bool forward = true;
};

using Path = std::vector<PathHop>;

/// Router-side attachment of a link; the unit Netmate-style sampling runs on.
struct Interface {
  int router = -1;
  int link = -1;
  std::string id;  // "<router>.<link>"
};

struct Topology {
  std::vector<Node> nodes;
  std::vector<Link> links;
  // primary route per ordered (src,dst) host pair, computed or explicit
  std::map<std::pair<int, int>, Path> paths;
  // alternate routes per ordered pair, used by the load-balance policy
  std::map<std::pair<int, int>, std::vector<Path>> alternates;

  int node_index(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
  }
  int link_index(const std::string& id) const {
    for (std::size_t i = 0; i < links.size(); ++i)
      if (links[i].id == id) return static_cast<int>(i);
    return -1;
  }

  std::vector<int> hosts() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].kind == NodeKind::Host) out.push_back(static_cast<int>(i));
    return out;
  }

  /// All router-side link attachments, sorted by (router id, link id).
  std::vector<Interface> monitored_interfaces() const {
    std::vector<Interface> out;
    for (std::size_t li = 0; li < links.size(); ++li) {
      for (int n : {links[li].a, links[li].b}) {
        if (nodes[n].kind != NodeKind::Router) continue;
        Interface it;
        it.router = n;
        it.link = static_cast<int>(li);
        it.id = nodes[n].id + "." + links[li].id;
        out.push_back(it);
      }
    }
    std::sort(out.begin(), out.end(),
              [](const Interface& x, const Interface& y) { return x.id < y.id; });
    return out;
  }

  const Path& path_for(int src, int dst) const {
    auto it = paths.find({src, dst});
    if (it == paths.end())
      throw TopologyError("no route from " + nodes[src].id + " to " + nodes[dst].id);
    return it->second;
  }

  const std::vector<Path>* alternates_for(int src, int dst) const {
    auto it = alternates.find({src, dst});
    return it == alternates.end() ? nullptr : &it->second;
  }
};

namespace detail {

inline Path chain_links(const Topology& t, int src, int dst,
                        const std::vector<int>& link_seq, const std::string& ctx) {
  Path path;
  int cur = src;
  for (int li : link_seq) {
    const Link& l = t.links[li];
    PathHop hop;
    hop.link = li;
    if (l.a == cur) {
      hop.forward = true;
      cur = l.b;
    } else if (l.b == cur) {
      hop.forward = false;
      cur = l.a;
    } else {
      throw TopologyError(ctx + ": link " + l.id + " does not extend the path at " +
                          t.nodes[cur].id);
    }
    path.push_back(hop);
  }
  if (cur != dst)
    throw TopologyError(ctx + ": path ends at " + t.nodes[cur].id + ", expected " +
                        t.nodes[dst].id);
  return path;
}

/// BFS shortest path by hop count. Adjacency is visited in (node id, link id)
/// order, so ties resolve to the lexicographically smallest route and routing
/// is reproducible.
inline bool bfs_path(const Topology& t, int src, int dst,
                     const std::set<int>& banned_links, std::vector<int>& out_links) {
  struct Edge {
    int to;
    int link;
  };
  std::vector<std::vector<Edge>> adj(t.nodes.size());
  for (std::size_t li = 0; li < t.links.size(); ++li) {
    if (banned_links.count(static_cast<int>(li))) continue;
    const Link& l = t.links[li];
    adj[l.a].push_back({l.b, static_cast<int>(li)});
    adj[l.b].push_back({l.a, static_cast<int>(li)});
  }
  for (auto& edges : adj)
    std::sort(edges.begin(), edges.end(), [&](const Edge& x, const Edge& y) {
      if (t.nodes[x.to].id != t.nodes[y.to].id) return t.nodes[x.to].id < t.nodes[y.to].id;
      return t.links[x.link].id < t.links[y.link].id;
    });

  std::vector<int> prev_node(t.nodes.size(), -1), prev_link(t.nodes.size(), -1);
  std::vector<bool> seen(t.nodes.size(), false);
  std::deque<int> queue{src};
  seen[src] = true;
  while (!queue.empty()) {
    int n = queue.front();
    queue.pop_front();
    if (n == dst) break;
    // hosts do not forward transit traffic
    if (n != src && t.nodes[n].kind == NodeKind::Host) continue;
    for (const Edge& e : adj[n]) {
      if (seen[e.to]) continue;
      seen[e.to] = true;
      prev_node[e.to] = n;
      prev_link[e.to] = e.link;
      queue.push_back(e.to);
    }
  }
  if (!seen[dst]) return false;
  out_links.clear();
  for (int n = dst; n != src; n = prev_node[n]) out_links.push_back(prev_link[n]);
  std::reverse(out_links.begin(), out_links.end());
  return true;
}

}  // namespace detail

/// Parses and validates a topology file. Routes (and alternates) are computed
/// by shortest hop count for every ordered host pair unless given explicitly.
inline Topology load_topology(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw TopologyError(std::string("topology parse failure: ") + e.what());
  }

  Topology t;
  if (!j.contains("nodes") || !j["nodes"].is_array())
    throw TopologyError("topology: missing \"nodes\" array");
  for (const auto& jn : j["nodes"]) {
    Node n;
    n.id = jn.at("id").get<std::string>();
    std::string kind = jn.at("kind").get<std::string>();
    if (kind == "router")
      n.kind = NodeKind::Router;
    else if (kind == "host")
      n.kind = NodeKind::Host;
    else
      throw TopologyError("node " + n.id + ": unknown kind '" + kind + "'");
    if (t.node_index(n.id) >= 0) throw TopologyError("duplicate node id " + n.id);
    t.nodes.push_back(n);
  }

  if (!j.contains("links") || !j["links"].is_array())
    throw TopologyError("topology: missing \"links\" array");
  for (const auto& jl : j["links"]) {
    Link l;
    l.id = jl.at("id").get<std::string>();
    if (t.link_index(l.id) >= 0) throw TopologyError("duplicate link id " + l.id);
    std::string a = jl.at("a").get<std::string>();
    std::string b = jl.at("b").get<std::string>();
    l.a = t.node_index(a);
    l.b = t.node_index(b);
    if (l.a < 0) throw TopologyError("link " + l.id + ": unknown node \"" + a + "\"");
    if (l.b < 0) throw TopologyError("link " + l.id + ": unknown node \"" + b + "\"");
    if (l.a == l.b) throw TopologyError("link " + l.id + ": self loop");
    l.capacity_bps = jl.at("capacity_mbps").get<double>() * 1e6;
    if (!(l.capacity_bps > 0))
      throw TopologyError("link " + l.id + ": capacity must be positive");
    l.latency_s = jl.value("latency_ms", 2.0) * 1e-3;
    if (l.latency_s < 0) throw TopologyError("link " + l.id + ": negative latency");
    t.links.push_back(l);
  }

  auto parse_pair_key = [&](const std::string& key) -> std::pair<int, int> {
    auto pos = key.find('>');
    if (pos == std::string::npos)
      throw TopologyError("route key '" + key + "' is not \"src>dst\"");
    int s = t.node_index(key.substr(0, pos));
    int d = t.node_index(key.substr(pos + 1));
    if (s < 0 || d < 0) throw TopologyError("route key '" + key + "': unknown node");
    return {s, d};
  };
  auto links_of = [&](const nlohmann::json& arr, const std::string& ctx) {
    std::vector<int> seq;
    for (const auto& lid : arr) {
      int li = t.link_index(lid.get<std::string>());
      if (li < 0)
        throw TopologyError(ctx + ": unknown link \"" + lid.get<std::string>() + "\"");
      seq.push_back(li);
    }
    return seq;
  };

  if (j.contains("paths")) {
    for (const auto& [key, arr] : j["paths"].items()) {
      auto [s, d] = parse_pair_key(key);
      t.paths[{s, d}] = detail::chain_links(t, s, d, links_of(arr, "path " + key), "path " + key);
    }
  }
  if (j.contains("alternates")) {
    for (const auto& [key, arrs] : j["alternates"].items()) {
      auto [s, d] = parse_pair_key(key);
      std::vector<Path> alts;
      for (const auto& arr : arrs)
        alts.push_back(
            detail::chain_links(t, s, d, links_of(arr, "alternate " + key), "alternate " + key));
      t.alternates[{s, d}] = alts;
    }
  }

  // fill in missing routes and alternates
  auto hosts = t.hosts();
  for (int s : hosts) {
    for (int d : hosts) {
      if (s == d) continue;
      std::vector<int> seq;
      if (!t.paths.count({s, d})) {
        if (!detail::bfs_path(t, s, d, {}, seq))
          throw TopologyError("no route between " + t.nodes[s].id + " and " + t.nodes[d].id);
        t.paths[{s, d}] = detail::chain_links(t, s, d, seq, "computed path");
      }
      if (!t.alternates.count({s, d})) {
        // successively link-disjoint relief routes over the router core
        auto router_link = [&](int li) {
          const Link& l = t.links[li];
          return t.nodes[l.a].kind == NodeKind::Router && t.nodes[l.b].kind == NodeKind::Router;
        };
        const Path& primary = t.paths[{s, d}];
        std::set<int> banned;
        for (const PathHop& hop : primary)
          if (router_link(hop.link)) banned.insert(hop.link);
        std::vector<Path> alts;
        while (alts.size() < 2 && !banned.empty()) {
          if (!detail::bfs_path(t, s, d, banned, seq)) break;
          Path alt = detail::chain_links(t, s, d, seq, "computed alternate");
          bool extended = false;
          for (const PathHop& hop : alt)
            if (router_link(hop.link) && banned.insert(hop.link).second) extended = true;
          alts.push_back(std::move(alt));
          if (!extended) break;
        }
        if (!alts.empty()) t.alternates[{s, d}] = alts;
      }
    }
  }
  return t;
}

inline Topology load_topology_file(const std::string& path) {
  return load_topology(read_file(path));
}

/// Bundled default: two host clusters joined by three parallel two-hop router
/// paths. 8 host attachments + 14 router-router attachments = 22 monitored
/// interfaces; cross traffic funnels through r2 (lowest id wins BFS ties),
/// leaving the r4/r5 paths as relief capacity.
inline const char* default_topology_json() {
  return R"({
  "nodes": [
    {"id": "r1", "kind": "router"}, {"id": "r2", "kind": "router"},
    {"id": "r3", "kind": "router"}, {"id": "r4", "kind": "router"},
    {"id": "r5", "kind": "router"},
    {"id": "h1", "kind": "host"}, {"id": "h2", "kind": "host"},
    {"id": "h3", "kind": "host"}, {"id": "h4", "kind": "host"},
    {"id": "h5", "kind": "host"}, {"id": "h6", "kind": "host"},
    {"id": "h7", "kind": "host"}, {"id": "h8", "kind": "host"}
  ],
  "links": [
    {"id": "l01", "a": "h1", "b": "r1", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l02", "a": "h2", "b": "r1", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l03", "a": "h3", "b": "r1", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l04", "a": "h4", "b": "r1", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l05", "a": "h5", "b": "r3", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l06", "a": "h6", "b": "r3", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l07", "a": "h7", "b": "r3", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l08", "a": "h8", "b": "r3", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l09", "a": "r1", "b": "r2", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l10", "a": "r2", "b": "r3", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l11", "a": "r1", "b": "r4", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l12", "a": "r4", "b": "r3", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l13", "a": "r1", "b": "r5", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l14", "a": "r5", "b": "r3", "capacity_mbps": 100, "latency_ms": 2},
    {"id": "l15", "a": "r2", "b": "r4", "capacity_mbps": 100, "latency_ms": 2}
  ]
})";
}

inline Topology default_topology() { return load_topology(default_topology_json()); }

}  // namespace bwpred
