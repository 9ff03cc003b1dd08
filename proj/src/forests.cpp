#include "interlab/forests.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <numeric>

namespace interlab {

bool is_spanning_tree(const WeightedGraph& graph, const Forest& forest) {
  const std::size_t n = graph.num_vertices();
  if (forest.parent.size() != n) return false;
  std::size_t roots = 0;
  for (Vertex x = 0; x < static_cast<Vertex>(n); ++x) {
    Vertex p = forest.parent[x];
    if (p == kRoot) {
      ++roots;
    } else if (p < 0 || graph.conductance(x, p) <= 0.0) {
      return false;
    }
  }
  if (roots != 1) return false;
  // every vertex reaches the root in at most n steps
  for (Vertex x = 0; x < static_cast<Vertex>(n); ++x) {
    Vertex y = x;
    std::size_t hops = 0;
    while (forest.parent[y] != kRoot) {
      y = forest.parent[y];
      if (++hops > n) return false;
    }
  }
  return true;
}

Forest wilson(const WeightedGraph& graph, Vertex root, Rng& rng) {
  const std::size_t n = graph.num_vertices();
  require(root >= 0 && static_cast<std::size_t>(root) < n, ErrorCode::invalid_argument,
          "root outside the graph");
  Forest f;
  f.parent.assign(n, kAbsent);
  f.parent[root] = kRoot;
  f.roots = {root};
  std::vector<char> in_tree(n, 0);
  std::vector<Vertex> next(n, kAbsent);
  in_tree[root] = 1;
  for (Vertex i = 0; i < static_cast<Vertex>(n); ++i) {
    Vertex u = i;
    while (!in_tree[u]) {
      next[u] = step(graph, u, rng);
      u = next[u];
    }
    u = i;
    while (!in_tree[u]) {
      in_tree[u] = 1;
      f.parent[u] = next[u];
      u = next[u];
    }
  }
  return f;
}

Forest aldous_broder_extract(const Trajectory& trace, ABMode mode,
                             std::span<const Vertex> targets, std::size_t num_vertices) {
  Forest f;
  f.parent.assign(num_vertices, kAbsent);
  std::vector<char> wanted(num_vertices, 0);
  std::size_t pending = 0;
  for (Vertex t : targets) {
    require(t >= 0 && static_cast<std::size_t>(t) < num_vertices, ErrorCode::invalid_argument,
            "target outside the graph");
    if (!wanted[t]) {
      wanted[t] = 1;
      ++pending;
    }
  }
  const std::size_t total = pending;
  bool counting = mode == ABMode::from_start;
  Vertex prev = kInf;
  for (Vertex x : trace.steps) {
    if (pending == 0) break;
    if (x == kInf) {
      counting = true;
      prev = kInf;
      continue;
    }
    if (counting && wanted[x]) {
      wanted[x] = 0;
      --pending;
      f.parent[x] = prev == kInf ? kRoot : prev;
      if (prev == kInf) f.roots.push_back(x);
    }
    prev = x;
  }
  f.coverage = total == 0 ? 1.0 : static_cast<double>(total - pending) / static_cast<double>(total);
  return f;
}

EdgeMarginals exact_marginals(const WeightedGraph& graph, std::span<const VertexPair> edges,
                              BoundaryKind kind, const SolverOptions& options) {
  EdgeMarginals m;
  m.kind = kind;
  m.edges.assign(edges.begin(), edges.end());
  for (auto [u, v] : edges) {
    double c = graph.conductance(u, v);
    require(c > 0.0, ErrorCode::invalid_argument,
            "panel pair " + graph.name(u) + " " + graph.name(v) + " is not an edge");
    m.probability.push_back(std::clamp(c * effective_resistance(graph, u, v, options), 0.0, 1.0));
  }
  return m;
}

EdgeMarginals exact_marginals(const WeightedGraph& graph, BoundaryKind kind,
                              const SolverOptions& options) {
  std::vector<VertexPair> all;
  for (const Edge& e : graph.edges()) all.emplace_back(e.u, e.v);
  return exact_marginals(graph, all, kind, options);
}

EdgeMarginals panel_marginals(const WeightedGraph& graph, const Exhaustion& exhaustion, int n,
                              std::span<const VertexPair> panel, BoundaryKind kind,
                              const SolverOptions& options) {
  for (auto [u, v] : panel) {
    require(exhaustion.contains(n, u) && exhaustion.contains(n, v), ErrorCode::invalid_argument,
            "panel edge leaves VG_" + std::to_string(n));
  }
  std::vector<VertexPair> local;
  EdgeMarginals m;
  if (kind == BoundaryKind::free) {
    auto fw = free_window(graph, exhaustion, n);
    for (auto [u, v] : panel) local.emplace_back(fw.from_base[u], fw.from_base[v]);
    m = exact_marginals(fw.graph, local, kind, options);
  } else {
    auto q = wire(graph, exhaustion, n);
    for (auto [u, v] : panel) local.emplace_back(q.from_base[u], q.from_base[v]);
    m = exact_marginals(q.graph, local, kind, options);
  }
  m.edges.assign(panel.begin(), panel.end());
  m.level = n;
  return m;
}

std::vector<VertexPair> central_panel(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                      std::size_t count) {
  const std::size_t n = graph.num_vertices();
  std::vector<int> dist(n, -1);
  Vertex c = exhaustion.center();
  std::deque<Vertex> queue{c};
  dist[c] = 0;
  while (!queue.empty()) {
    Vertex x = queue.front();
    queue.pop_front();
    for (Vertex y : graph.neighbors(x)) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  std::vector<std::array<int, 4>> keyed;
  for (const Edge& e : graph.edges()) {
    keyed.push_back({std::max(dist[e.u], dist[e.v]), std::min(dist[e.u], dist[e.v]), e.u, e.v});
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<VertexPair> out;
  for (std::size_t i = 0; i < std::min(count, keyed.size()); ++i) {
    out.emplace_back(keyed[i][2], keyed[i][3]);
  }
  return out;
}

namespace {

struct Enumerator {
  const WeightedGraph& graph;
  std::size_t need;
  std::vector<std::size_t> chosen;
  TreeLaw& law;

  static Vertex find(std::vector<Vertex>& uf, Vertex x) {
    while (uf[x] != x) x = uf[x];
    return x;
  }

  void run(std::size_t edge, std::vector<Vertex> uf) {
    if (chosen.size() == need) {
      double w = 1.0;
      for (std::size_t id : chosen) w *= graph.edges()[id].c;
      require(law.trees.size() < kMaxEnumeratedTrees, ErrorCode::too_large,
              "too many spanning trees to enumerate");
      law.trees.push_back(chosen);
      law.weight.push_back(w);
      return;
    }
    const std::size_t m = graph.num_edges();
    if (edge >= m || m - edge < need - chosen.size()) return;
    const Edge& e = graph.edges()[edge];
    Vertex a = find(uf, e.u), b = find(uf, e.v);
    if (a != b) {
      auto with = uf;
      with[a] = b;
      chosen.push_back(edge);
      run(edge + 1, std::move(with));
      chosen.pop_back();
    }
    run(edge + 1, std::move(uf));
  }
};

}  // namespace

TreeLaw enumerate_trees(const WeightedGraph& graph) {
  const std::size_t n = graph.num_vertices();
  require(n <= kMaxEnumerationVertices, ErrorCode::too_large,
          "enumeration is limited to " + std::to_string(kMaxEnumerationVertices) + " vertices");
  TreeLaw law;
  std::vector<Vertex> uf(n);
  std::iota(uf.begin(), uf.end(), 0);
  Enumerator en{graph, n - 1, {}, law};
  en.run(0, uf);
  law.partition = std::accumulate(law.weight.begin(), law.weight.end(), 0.0);
  for (double w : law.weight) law.probability.push_back(w / law.partition);
  return law;
}

std::vector<std::size_t> tree_edges(const WeightedGraph& graph, const Forest& forest) {
  std::vector<std::size_t> ids;
  for (Vertex x = 0; x < static_cast<Vertex>(forest.parent.size()); ++x) {
    Vertex p = forest.parent[x];
    if (p < 0) continue;
    auto id = graph.edge_id(x, p);
    require(id.has_value(), ErrorCode::invalid_argument, "forest uses a missing edge");
    ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace interlab
