#include "dirichlet.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <cmath>
#include <deque>
#include <sstream>

#include "interlab/error.hpp"

namespace interlab::detail {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Solver = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                        Eigen::DiagonalPreconditioner<double>>;

struct DirichletSolver::Impl {
  const WeightedGraph* graph = nullptr;
  SolverOptions options;
  std::vector<int> index;  // vertex -> unknown slot, -1 when fixed
  std::vector<Vertex> unknown;
  SparseMatrix matrix;
  Solver cg;
  int iterations = 0;
  double max_residual = 0.0;
};

DirichletSolver::DirichletSolver(const WeightedGraph& graph, std::span<const Vertex> fixed,
                                 const SolverOptions& options)
    : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  s.graph = &graph;
  s.options = options;
  const std::size_t n = graph.num_vertices();
  require(!fixed.empty(), ErrorCode::singular, "no fixed vertices: system is singular");
  s.index.assign(n, 0);
  for (Vertex x : fixed) {
    require(x >= 0 && static_cast<std::size_t>(x) < n, ErrorCode::invalid_argument,
            "fixed vertex out of range");
    s.index[x] = -1;
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (s.index[x] < 0) continue;
    s.index[x] = static_cast<int>(s.unknown.size());
    s.unknown.push_back(static_cast<Vertex>(x));
  }

  // every unknown must be connected to F through unknowns, or L_UU is singular
  std::vector<char> reached(n, 0);
  std::deque<Vertex> queue;
  for (Vertex x : fixed) {
    if (!reached[x]) {
      reached[x] = 1;
      queue.push_back(x);
    }
  }
  while (!queue.empty()) {
    Vertex x = queue.front();
    queue.pop_front();
    for (Vertex y : graph.neighbors(x)) {
      if (!reached[y] && s.index[y] >= 0) {
        reached[y] = 1;
        queue.push_back(y);
      }
    }
  }
  for (Vertex x : s.unknown) {
    require(reached[x], ErrorCode::singular,
            "vertex '" + graph.name(x) + "' is cut off from the boundary set");
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (Vertex x : s.unknown) {
    int i = s.index[x];
    triplets.emplace_back(i, i, graph.pi(x));
    auto nbrs = graph.neighbors(x);
    auto cs = graph.conductances(x);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      int j = s.index[nbrs[k]];
      if (j >= 0) triplets.emplace_back(i, j, -cs[k]);
    }
  }
  const auto m = static_cast<Eigen::Index>(s.unknown.size());
  s.matrix.resize(m, m);
  s.matrix.setFromTriplets(triplets.begin(), triplets.end());
  if (m > 0) {
    s.cg.setTolerance(options.tol);
    s.cg.setMaxIterations(options.max_iterations > 0 ? options.max_iterations
                                                     : static_cast<int>(2 * m + 100));
    s.cg.compute(s.matrix);
  }
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;

bool DirichletSolver::is_fixed(Vertex x) const { return impl_->index[x] < 0; }
std::size_t DirichletSolver::unknowns() const { return impl_->unknown.size(); }
int DirichletSolver::last_iterations() const { return impl_->iterations; }
double DirichletSolver::last_max_residual() const { return impl_->max_residual; }

std::vector<double> DirichletSolver::solve(std::span<const double> boundary,
                                           std::span<const double> source) {
  auto& s = *impl_;
  const WeightedGraph& g = *s.graph;
  const std::size_t n = g.num_vertices();
  require(boundary.size() == n, ErrorCode::invalid_argument, "boundary vector has wrong size");
  require(source.empty() || source.size() == n, ErrorCode::invalid_argument,
          "source vector has wrong size");

  std::vector<double> f(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (s.index[x] < 0) f[x] = boundary[x];
  }
  s.iterations = 0;
  s.max_residual = 0.0;
  if (s.unknown.empty()) return f;

  const auto m = static_cast<Eigen::Index>(s.unknown.size());
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Vertex x = s.unknown[i];
    double rhs = source.empty() ? 0.0 : source[x];
    auto nbrs = g.neighbors(x);
    auto cs = g.conductances(x);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (s.index[nbrs[k]] < 0) rhs += cs[k] * boundary[nbrs[k]];
    }
    b[i] = rhs;
  }
  if (b.norm() == 0.0) return f;

  Eigen::VectorXd sol = s.cg.solve(b);
  s.iterations = static_cast<int>(s.cg.iterations());
  if (s.cg.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "conjugate gradients stopped after " << s.cg.iterations()
        << " iterations with relative residual " << s.cg.error() << " (target "
        << s.options.tol << ")";
    fail(ErrorCode::not_converged, msg.str());
  }
  Eigen::VectorXd r = b - s.matrix * sol;
  s.max_residual = r.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < m; ++i) f[s.unknown[i]] = sol[i];
  return f;
}

}  // namespace interlab::detail
