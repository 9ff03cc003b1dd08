#pragma once

#include <memory>
#include <span>
#include <vector>

#include "interlab/graph.hpp"
#include "interlab/potential.hpp"

namespace interlab::detail {

/// Reduced Laplacian system L_UU f_U = s_U - L_UF phi_F for a fixed vertex
/// set F, factored once and reused across right-hand sides.
class DirichletSolver {
 public:
  DirichletSolver(const WeightedGraph& graph, std::span<const Vertex> fixed,
                  const SolverOptions& options);
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;

  /// `boundary` is indexed by vertex and read only on F; `source` (optional,
  /// indexed by vertex) is the prescribed Δf on unknowns. Returns f on every
  /// vertex.
  std::vector<double> solve(std::span<const double> boundary,
                            std::span<const double> source = {});

  bool is_fixed(Vertex x) const;
  std::size_t unknowns() const;
  int last_iterations() const;
  double last_max_residual() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace interlab::detail
