#pragma once

#include <span>
#include <vector>

#include "interlab/graph.hpp"

namespace interlab {

enum class BoundaryKind { free, wired };

std::string_view to_string(BoundaryKind kind);
BoundaryKind parse_boundary_kind(std::string_view text);

struct SolverOptions {
  /// Relative residual target for conjugate gradients.
  double tol = 1e-10;
  /// 0 picks 2 * unknowns + 100.
  int max_iterations = 0;
};

/// Real function on the vertices of a window or quotient.
struct PotentialField {
  std::vector<double> values;
  BoundaryKind kind = BoundaryKind::free;
  std::vector<Vertex> boundary;
  std::vector<double> boundary_values;
  double energy = 0.0;
  /// max |Δf(x)| over unconstrained x.
  double max_residual = 0.0;
  int iterations = 0;
};

/// Nonnegative masses on a finite vertex set.
struct Measure {
  std::vector<Vertex> support;
  std::vector<double> mass;

  double total() const;
  Measure normalized() const;
  /// Mass at x, 0 off the support.
  double at(Vertex x) const;
  static Measure point(Vertex x);
};

/// Antisymmetric edge function, stored once per edge in the u -> v
/// orientation of graph.edges().
struct Flow {
  std::vector<double> values;
  double energy = 0.0;

  /// θ(x, y) for an edge with the given id; reverses sign against the stored
  /// orientation.
  double along(const WeightedGraph& graph, std::size_t edge, Vertex from) const;
};

/// Symmetric square matrix stored row-major.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;

  Matrix() = default;
  explicit Matrix(std::size_t size) : n(size), a(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  double max_asymmetry() const;
};

/// Δf(x) = Σ_y c(x, y) (f(x) - f(y)) at every vertex.
std::vector<double> laplacian_apply(const WeightedGraph& graph, std::span<const double> f);

double dirichlet_energy(const WeightedGraph& graph, std::span<const double> f);
double dirichlet_energy(const WeightedGraph& graph, const Flow& flow);

/// Energy minimizer on the graph with f = phi on A and natural boundary
/// conditions everywhere else.
PotentialField solve_harmonic(const WeightedGraph& graph, std::span<const Vertex> A,
                              std::span<const double> phi, const SolverOptions& options = {});

/// Same on a wired quotient: z carries the value 0 unless A contains it.
PotentialField solve_harmonic(const WiredQuotient& quotient, std::span<const Vertex> A,
                              std::span<const double> phi, const SolverOptions& options = {});

/// Columns x -> G(x, k) of the Green function killed at z, one per k in K.
/// Ids are local to the quotient; column entries at z are 0.
struct GreenColumns {
  std::vector<Vertex> K;
  std::vector<std::vector<double>> columns;

  Matrix restricted() const;
  /// x -> Σ_k G(x, k) f(k) for f given on K in order.
  std::vector<double> apply(std::span<const double> f_on_K) const;
};

GreenColumns green_columns(const WiredQuotient& quotient, std::span<const Vertex> K,
                           const SolverOptions& options = {});
Matrix green_matrix(const WiredQuotient& quotient, std::span<const Vertex> K,
                    const SolverOptions& options = {});

struct Equilibrium {
  /// e_K on K, local quotient ids.
  Measure measure;
  double capacity = 0.0;
  Measure normalized;
  /// Wired voltage: 1 on K, 0 at z.
  PotentialField voltage;
};

Equilibrium equilibrium_measure(const WiredQuotient& quotient, std::span<const Vertex> K,
                                const SolverOptions& options = {});

/// The fields h^y_K, y in K, computed on a graph with free boundary; each
/// is 1 at y and 0 on K \ {y}.
struct HarmonicMeasureFields {
  std::vector<Vertex> K;
  std::vector<PotentialField> fields;

  /// y -> h^y_K(x); a point mass when x is in K.
  Measure at(Vertex x) const;
  bool degenerate(Vertex x) const;
};

HarmonicMeasureFields harmonic_measure_fields(const WeightedGraph& graph,
                                              std::span<const Vertex> K,
                                              const SolverOptions& options = {});
/// Wired variant: the fields are solved on the quotient with z left free, so
/// they still sum to 1.
HarmonicMeasureFields harmonic_measure_fields(const WiredQuotient& quotient,
                                              std::span<const Vertex> K,
                                              const SolverOptions& options = {});

/// Free-boundary entry law y -> h^y_K(probe) on VG_n. K and probe are base
/// ids and the returned measure is supported on base ids.
struct EntryMeasure {
  Measure measure;
  bool degenerate = false;
};

EntryMeasure entry_measure_free(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                int n, std::span<const Vertex> K, Vertex probe,
                                const SolverOptions& options = {});

struct UnitCurrent {
  Flow flow;
  /// Voltage of the unit current: 0 on B, R_eff on A.
  PotentialField voltage;
  double resistance = 0.0;
};

/// Unit current from A to B. Passing a free window gives the free current;
/// passing a quotient graph gives the wired one (B = {z} is the current to
/// infinity).
UnitCurrent unit_current(const WeightedGraph& graph, std::span<const Vertex> A,
                         std::span<const Vertex> B, BoundaryKind kind,
                         const SolverOptions& options = {});
UnitCurrent unit_current_to_infinity(const WiredQuotient& quotient, std::span<const Vertex> A,
                                     const SolverOptions& options = {});

double effective_resistance(const WeightedGraph& graph, Vertex a, Vertex b,
                            const SolverOptions& options = {});

/// Largest |Σ θ / c| over the fundamental cycles of a BFS spanning tree.
double cycle_law_residual(const WeightedGraph& graph, const Flow& flow);

/// Net flux Σ_y θ(x, y) out of every vertex.
std::vector<double> divergence(const WeightedGraph& graph, const Flow& flow);

/// Gradient flow θ(x, y) = c(x, y) (f(x) - f(y)).
Flow gradient_flow(const WeightedGraph& graph, std::span<const double> f);

/// Aitken delta-squared limit of the last three entries (a Richardson step
/// with the ratio estimated from the data). Falls back to the last entry
/// when the sequence is too short or not geometrically converging.
struct Extrapolation {
  double value = 0.0;
  bool extrapolated = false;
};

Extrapolation extrapolate_limit(std::span<const double> sequence);

/// Spread of a field over a probe set, used to read off a value at infinity.
struct ProbeSpread {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

ProbeSpread probe_spread(std::span<const double> values, std::span<const Vertex> probes);

}  // namespace interlab
