#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace interlab {

using Vertex = int;

/// Unoriented edge, stored with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double c = 0.0;
};

using VertexPair = std::pair<Vertex, Vertex>;

class GraphBuilder;

/// Finite, locally finite, connected graph with symmetric positive
/// conductances. Immutable once built; adjacency is stored in CSR form.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  std::size_t num_vertices() const { return pi_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  std::span<const Vertex> neighbors(Vertex x) const {
    return {adj_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
  }
  std::span<const double> conductances(Vertex x) const {
    return {cond_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
  }
  /// Edge ids parallel to neighbors(x).
  std::span<const std::size_t> incident_edges(Vertex x) const {
    return {slot_edge_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
  }
  std::size_t degree(Vertex x) const { return offsets_[x + 1] - offsets_[x]; }

  double pi(Vertex x) const { return pi_[x]; }
  std::span<const double> pi() const { return pi_; }

  /// c(x, y), or 0 when x and y are not adjacent.
  double conductance(Vertex x, Vertex y) const;
  std::optional<std::size_t> edge_id(Vertex x, Vertex y) const;

  const std::vector<Edge>& edges() const { return edges_; }
  double total_conductance() const;

  const std::string& name(Vertex x) const { return names_[x]; }
  std::optional<Vertex> find(std::string_view name) const;
  /// Like find() but throws when the name is unknown.
  Vertex vertex(std::string_view name) const;

  bool connected() const;

 private:
  friend class GraphBuilder;

  std::vector<std::string> names_;
  std::unordered_map<std::string, Vertex> index_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Vertex> adj_;
  std::vector<double> cond_;
  std::vector<std::size_t> slot_edge_;
  std::vector<double> pi_;
  std::vector<Edge> edges_;
};

class GraphBuilder {
 public:
  /// Returns the existing id when the name is already known.
  Vertex add_vertex(std::string_view name);
  /// Repeating an edge with the same conductance is accepted; a conflicting
  /// conductance is an error (asymmetric when the orientation is reversed).
  void add_edge(Vertex u, Vertex v, double c);
  void add_edge(std::string_view u, std::string_view v, double c);

  std::size_t num_vertices() const { return names_.size(); }

  WeightedGraph build(bool require_connected = true) &&;

 private:
  struct Stored {
    Vertex first;
    double c;
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, Vertex> index_;
  std::unordered_map<unsigned long long, Stored> edges_;
  std::vector<VertexPair> order_;
};

/// Nested vertex sets VG_0 ⊂ VG_1 ⊂ ... ⊂ VG_N inside a realized window.
/// Level n holds every vertex whose shell index is at most n; the window is
/// level N. Level 0 is the seed set around which the window was grown.
class Exhaustion {
 public:
  Exhaustion() = default;
  /// Validates nesting, connectivity of every level and that every level
  /// strictly grows.
  Exhaustion(const WeightedGraph& graph, std::vector<int> shell);

  int window() const { return static_cast<int>(levels_.size()) - 1; }
  int shell(Vertex x) const { return shell_[x]; }
  std::span<const int> shells() const { return shell_; }
  bool contains(int level, Vertex x) const { return shell_[x] <= level; }

  /// Sorted vertex ids of VG_level.
  std::span<const Vertex> level(int n) const;
  /// Vertices of the outermost shell; walks treat them as the point at
  /// infinity.
  std::span<const Vertex> rim() const { return shell_members_.back(); }
  std::span<const Vertex> shell_members(int n) const { return shell_members_.at(n); }
  /// Vertices of VG_n with at least one neighbor outside VG_n.
  std::vector<Vertex> boundary(const WeightedGraph& graph, int n) const;
  Vertex center() const { return shell_members_.front().front(); }

 private:
  std::vector<int> shell_;
  std::vector<std::vector<Vertex>> levels_;
  std::vector<std::vector<Vertex>> shell_members_;
};

/// Induced subgraph on VG_n: the free-boundary window at level n.
struct FreeWindow {
  WeightedGraph graph;
  int level = 0;
  std::vector<Vertex> to_base;
  /// Base vertex to local id, -1 outside VG_n.
  std::vector<Vertex> from_base;
};

/// VG_n with everything outside collapsed to a single vertex z_n.
struct WiredQuotient {
  WeightedGraph graph;
  int level = 0;
  Vertex zed = 0;
  /// Local id to base vertex; zed maps to -1.
  std::vector<Vertex> to_base;
  /// Base vertex to local id; exterior vertices map to zed.
  std::vector<Vertex> from_base;
};

FreeWindow free_window(const WeightedGraph& graph, const Exhaustion& exhaustion, int n);
WiredQuotient wire(const WeightedGraph& graph, const Exhaustion& exhaustion, int n);

/// Sum of c(x, y) over edges with exactly one endpoint in VG_n.
double cut_conductance(const WeightedGraph& graph, const Exhaustion& exhaustion, int n);

// ---------------------------------------------------------------------------
// Example families

enum class Family { zd_box, regular_tree, product, ladder, two_sheet };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

struct FamilyParams {
  Family family = Family::zd_box;
  int dim = 3;
  /// Box radius, tree depth, or graph-distance radius (ladder).
  int radius = 4;
  int branching = 2;
  /// product: the finite factor is a cycle on this many vertices (a single
  /// edge when 2) with conductance fiber_conductance.
  int fiber = 2;
  double fiber_conductance = 1.0;
  /// ladder: rung conductance c_k = ladder_ratio^k between k in N_0 and
  /// (k, 0, ..., 0). A ratio of 0 gives the plain glued graph.
  double ladder_ratio = 0.5;
};

struct Window {
  WeightedGraph graph;
  Exhaustion exhaustion;
  FamilyParams params;
};

Window build_family(const FamilyParams& params);

/// Vertex names used by the families, e.g. zd_name({1,0,0}) == "1,0,0".
std::string lattice_name(std::span<const int> coords);

// ---------------------------------------------------------------------------
// Text I/O

/// Edge list: one `<u> <v> <c>` per line; `#` starts a comment.
WeightedGraph read_graph(std::string_view text);
std::string write_graph(const WeightedGraph& graph);

/// One line per level listing the vertex ids of that level.
Exhaustion read_exhaustion(std::string_view text, const WeightedGraph& graph);
std::string write_exhaustion(const WeightedGraph& graph, const Exhaustion& exhaustion);

/// Resolves a list of vertex names, rejecting unknown names and repeats.
std::vector<Vertex> resolve_vertices(const WeightedGraph& graph,
                                     std::span<const std::string> names);

}  // namespace interlab
