#include "interlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "interlab/error.hpp"

namespace interlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::asymmetric: return "asymmetric";
    case ErrorCode::disconnected: return "disconnected";
    case ErrorCode::singular: return "singular";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::too_large: return "too_large";
    case ErrorCode::io: return "io";
    case ErrorCode::usage: return "usage";
  }
  return "unknown";
}

namespace {

unsigned long long pair_key(Vertex a, Vertex b) {
  auto lo = static_cast<unsigned long long>(std::min(a, b));
  auto hi = static_cast<unsigned long long>(std::max(a, b));
  return (lo << 32) | hi;
}

// Connectivity of the subgraph induced by `member`.
bool induced_connected(const WeightedGraph& g, std::span<const Vertex> vertices,
                       const std::vector<char>& member) {
  if (vertices.empty()) return true;
  std::vector<char> seen(g.num_vertices(), 0);
  std::deque<Vertex> queue{vertices.front()};
  seen[vertices.front()] = 1;
  std::size_t count = 1;
  while (!queue.empty()) {
    Vertex x = queue.front();
    queue.pop_front();
    for (Vertex y : g.neighbors(x)) {
      if (member[y] && !seen[y]) {
        seen[y] = 1;
        ++count;
        queue.push_back(y);
      }
    }
  }
  return count == vertices.size();
}

}  // namespace

double WeightedGraph::conductance(Vertex x, Vertex y) const {
  auto nbrs = neighbors(x);
  auto c = conductances(x);
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    if (nbrs[i] == y) return c[i];
  }
  return 0.0;
}

std::optional<std::size_t> WeightedGraph::edge_id(Vertex x, Vertex y) const {
  auto nbrs = neighbors(x);
  auto ids = incident_edges(x);
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    if (nbrs[i] == y) return ids[i];
  }
  return std::nullopt;
}

double WeightedGraph::total_conductance() const {
  double total = 0.0;
  for (const Edge& e : edges_) total += e.c;
  return total;
}

std::optional<Vertex> WeightedGraph::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vertex WeightedGraph::vertex(std::string_view name) const {
  auto v = find(name);
  if (!v) fail(ErrorCode::invalid_argument, "unknown vertex '" + std::string(name) + "'");
  return *v;
}

bool WeightedGraph::connected() const {
  std::vector<Vertex> all(num_vertices());
  std::iota(all.begin(), all.end(), 0);
  std::vector<char> member(num_vertices(), 1);
  return induced_connected(*this, all, member);
}

Vertex GraphBuilder::add_vertex(std::string_view name) {
  std::string key(name);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  require(!key.empty(), ErrorCode::invalid_argument, "empty vertex name");
  auto id = static_cast<Vertex>(names_.size());
  names_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

void GraphBuilder::add_edge(Vertex u, Vertex v, double c) {
  auto n = static_cast<Vertex>(names_.size());
  require(u >= 0 && v >= 0 && u < n && v < n, ErrorCode::invalid_argument,
          "edge endpoint out of range");
  require(u != v, ErrorCode::invalid_argument, "self-loop at '" + names_[u] + "'");
  require(std::isfinite(c) && c > 0.0, ErrorCode::invalid_argument,
          "nonpositive conductance on edge " + names_[u] + " " + names_[v]);
  auto key = pair_key(u, v);
  auto it = edges_.find(key);
  if (it == edges_.end()) {
    edges_.emplace(key, Stored{u, c});
    order_.emplace_back(std::min(u, v), std::max(u, v));
    return;
  }
  if (it->second.c == c) return;
  if (it->second.first != u) {
    fail(ErrorCode::asymmetric, "asymmetric conductance between " + names_[u] + " and " +
                                    names_[v]);
  }
  fail(ErrorCode::invalid_argument,
       "duplicate edge with conflicting conductance: " + names_[u] + " " + names_[v]);
}

void GraphBuilder::add_edge(std::string_view u, std::string_view v, double c) {
  Vertex a = add_vertex(u);
  Vertex b = add_vertex(v);
  add_edge(a, b, c);
}

WeightedGraph GraphBuilder::build(bool require_connected) && {
  WeightedGraph g;
  const std::size_t n = names_.size();
  require(n > 0, ErrorCode::invalid_argument, "graph has no vertices");
  g.names_ = std::move(names_);
  g.index_ = std::move(index_);

  g.edges_.reserve(order_.size());
  for (auto [u, v] : order_) g.edges_.push_back(Edge{u, v, edges_.at(pair_key(u, v)).c});

  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : g.edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
  g.adj_.resize(g.offsets_[n]);
  g.cond_.resize(g.offsets_[n]);
  g.slot_edge_.resize(g.offsets_[n]);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::size_t id = 0; id < g.edges_.size(); ++id) {
    const Edge& e = g.edges_[id];
    auto put = [&](Vertex from, Vertex to) {
      std::size_t slot = fill[from]++;
      g.adj_[slot] = to;
      g.cond_[slot] = e.c;
      g.slot_edge_[slot] = id;
    };
    put(e.u, e.v);
    put(e.v, e.u);
  }
  g.pi_.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t s = g.offsets_[x]; s < g.offsets_[x + 1]; ++s) g.pi_[x] += g.cond_[s];
  }
  if (require_connected) {
    require(g.connected(), ErrorCode::disconnected, "graph is disconnected");
  }
  return g;
}

Exhaustion::Exhaustion(const WeightedGraph& graph, std::vector<int> shell)
    : shell_(std::move(shell)) {
  require(shell_.size() == graph.num_vertices(), ErrorCode::invalid_argument,
          "exhaustion does not cover the graph");
  int top = -1;
  for (int s : shell_) {
    require(s >= 0, ErrorCode::invalid_argument, "negative shell index");
    top = std::max(top, s);
  }
  shell_members_.assign(static_cast<std::size_t>(top) + 1, {});
  for (std::size_t x = 0; x < shell_.size(); ++x) {
    shell_members_[shell_[x]].push_back(static_cast<Vertex>(x));
  }
  for (int n = 0; n <= top; ++n) {
    require(!shell_members_[n].empty(), ErrorCode::invalid_argument,
            "exhaustion level " + std::to_string(n) + " does not grow");
  }
  levels_.resize(shell_members_.size());
  std::vector<char> member(graph.num_vertices(), 0);
  std::vector<Vertex> current;
  for (int n = 0; n <= top; ++n) {
    for (Vertex x : shell_members_[n]) member[x] = 1;
    current.insert(current.end(), shell_members_[n].begin(), shell_members_[n].end());
    std::sort(current.begin(), current.end());
    require(induced_connected(graph, current, member), ErrorCode::disconnected,
            "exhaustion level " + std::to_string(n) + " is not connected");
    levels_[n] = current;
  }
}

std::span<const Vertex> Exhaustion::level(int n) const {
  require(n >= 0 && n <= window(), ErrorCode::invalid_argument,
          "level " + std::to_string(n) + " outside the window");
  return levels_[n];
}

std::vector<Vertex> Exhaustion::boundary(const WeightedGraph& graph, int n) const {
  std::vector<Vertex> out;
  for (Vertex x : level(n)) {
    for (Vertex y : graph.neighbors(x)) {
      if (shell_[y] > n) {
        out.push_back(x);
        break;
      }
    }
  }
  return out;
}

FreeWindow free_window(const WeightedGraph& graph, const Exhaustion& exhaustion, int n) {
  FreeWindow w;
  w.level = n;
  auto members = exhaustion.level(n);
  w.to_base.assign(members.begin(), members.end());
  w.from_base.assign(graph.num_vertices(), -1);
  GraphBuilder builder;
  for (Vertex x : members) w.from_base[x] = builder.add_vertex(graph.name(x));
  for (const Edge& e : graph.edges()) {
    if (w.from_base[e.u] >= 0 && w.from_base[e.v] >= 0) {
      builder.add_edge(w.from_base[e.u], w.from_base[e.v], e.c);
    }
  }
  w.graph = std::move(builder).build();
  return w;
}

WiredQuotient wire(const WeightedGraph& graph, const Exhaustion& exhaustion, int n) {
  require(n >= 0, ErrorCode::invalid_argument, "negative level");
  require(n < exhaustion.window(), ErrorCode::invalid_argument, "no exterior to wire");
  WiredQuotient q;
  q.level = n;
  auto members = exhaustion.level(n);
  q.to_base.assign(members.begin(), members.end());
  GraphBuilder builder;
  std::vector<Vertex> local(graph.num_vertices(), -1);
  for (Vertex x : members) local[x] = builder.add_vertex(graph.name(x));
  q.zed = builder.add_vertex("@z" + std::to_string(n));
  q.to_base.push_back(-1);

  std::vector<double> to_zed(members.size(), 0.0);
  for (const Edge& e : graph.edges()) {
    Vertex a = local[e.u];
    Vertex b = local[e.v];
    if (a >= 0 && b >= 0) {
      builder.add_edge(a, b, e.c);
    } else if (a >= 0) {
      to_zed[a] += e.c;
    } else if (b >= 0) {
      to_zed[b] += e.c;
    }
  }
  for (std::size_t x = 0; x < to_zed.size(); ++x) {
    if (to_zed[x] > 0.0) builder.add_edge(static_cast<Vertex>(x), q.zed, to_zed[x]);
  }
  q.graph = std::move(builder).build();
  q.from_base.assign(graph.num_vertices(), q.zed);
  for (Vertex x : members) q.from_base[x] = local[x];
  return q;
}

double cut_conductance(const WeightedGraph& graph, const Exhaustion& exhaustion, int n) {
  double total = 0.0;
  for (const Edge& e : graph.edges()) {
    if (exhaustion.contains(n, e.u) != exhaustion.contains(n, e.v)) total += e.c;
  }
  return total;
}

std::vector<Vertex> resolve_vertices(const WeightedGraph& graph,
                                     std::span<const std::string> names) {
  std::vector<Vertex> out;
  out.reserve(names.size());
  for (const auto& name : names) {
    Vertex v = graph.vertex(name);
    require(std::find(out.begin(), out.end(), v) == out.end(), ErrorCode::invalid_argument,
            "vertex '" + name + "' listed twice");
    out.push_back(v);
  }
  return out;
}

}  // namespace interlab
