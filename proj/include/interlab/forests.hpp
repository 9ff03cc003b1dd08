#pragma once

#include <span>
#include <vector>

#include "interlab/graph.hpp"
#include "interlab/potential.hpp"
#include "interlab/samplers.hpp"

namespace interlab {

inline constexpr Vertex kRoot = -1;
inline constexpr Vertex kAbsent = -2;

/// Parent pointers: kRoot for roots, kAbsent for vertices outside the forest
/// (uncovered or not targeted).
struct Forest {
  std::vector<Vertex> parent;
  std::vector<Vertex> roots;
  /// Fraction of target vertices that received a parent or became a root.
  double coverage = 1.0;

  bool contains(Vertex u, Vertex v) const {
    return (parent[u] == v) || (parent[v] == u);
  }
};

/// Whether the parent pointers form a spanning tree of the graph rooted at a
/// single vertex: every edge exists, and following parents reaches the root.
bool is_spanning_tree(const WeightedGraph& graph, const Forest& forest);

/// c-weighted spanning tree by loop-erased walks towards root.
Forest wilson(const WeightedGraph& graph, Vertex root, Rng& rng);

enum class ABMode { from_start, after_first_inf };

/// First-entry parents read off a trace. Only vertices in targets get a
/// parent; a vertex first entered right after a kInf marker (or the first
/// vertex of the trace in from_start mode) is a root.
Forest aldous_broder_extract(const Trajectory& trace, ABMode mode,
                             std::span<const Vertex> targets, std::size_t num_vertices);

struct EdgeMarginals {
  std::vector<VertexPair> edges;
  std::vector<double> probability;
  BoundaryKind kind = BoundaryKind::free;
  int level = -1;
};

/// P[e in tree] = c(e) R_eff(e) for the listed edges of a finite graph.
EdgeMarginals exact_marginals(const WeightedGraph& graph, std::span<const VertexPair> edges,
                              BoundaryKind kind, const SolverOptions& options = {});
/// All edges.
EdgeMarginals exact_marginals(const WeightedGraph& graph, BoundaryKind kind,
                              const SolverOptions& options = {});

/// Marginals of the panel edges (base ids) on the free window or the wired
/// quotient at level n.
EdgeMarginals panel_marginals(const WeightedGraph& graph, const Exhaustion& exhaustion, int n,
                              std::span<const VertexPair> panel, BoundaryKind kind,
                              const SolverOptions& options = {});

/// The count edges nearest to the center, ordered by graph distance of the
/// farther endpoint, then the nearer one, then vertex ids.
std::vector<VertexPair> central_panel(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                      std::size_t count);

struct TreeLaw {
  /// Edge ids of each spanning tree.
  std::vector<std::vector<std::size_t>> trees;
  std::vector<double> weight;
  std::vector<double> probability;
  double partition = 0.0;
};

inline constexpr std::size_t kMaxEnumerationVertices = 12;
inline constexpr std::size_t kMaxEnumeratedTrees = 2'000'000;

/// Every spanning tree with weight Π c(e); refuses graphs above
/// kMaxEnumerationVertices vertices or with too many trees.
TreeLaw enumerate_trees(const WeightedGraph& graph);

/// Sorted edge ids of a spanning-tree forest, for matching against TreeLaw.
std::vector<std::size_t> tree_edges(const WeightedGraph& graph, const Forest& forest);

}  // namespace interlab
