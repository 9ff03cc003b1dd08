#include "interlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "dirichlet.hpp"
#include "interlab/error.hpp"

namespace interlab {

std::string_view to_string(BoundaryKind kind) {
  return kind == BoundaryKind::free ? "free" : "wired";
}

BoundaryKind parse_boundary_kind(std::string_view text) {
  if (text == "free") return BoundaryKind::free;
  if (text == "wired") return BoundaryKind::wired;
  fail(ErrorCode::invalid_argument, "boundary kind must be free or wired, got '" +
                                        std::string(text) + "'");
}

double Measure::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

Measure Measure::normalized() const {
  double t = total();
  require(t > 0.0, ErrorCode::invalid_argument, "cannot normalize a zero measure");
  Measure out = *this;
  for (double& m : out.mass) m /= t;
  return out;
}

double Measure::at(Vertex x) const {
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == x) return mass[i];
  }
  return 0.0;
}

Measure Measure::point(Vertex x) { return Measure{{x}, {1.0}}; }

double Flow::along(const WeightedGraph& graph, std::size_t edge, Vertex from) const {
  return graph.edges()[edge].u == from ? values[edge] : -values[edge];
}

double Matrix::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
    }
  }
  return worst;
}

std::vector<double> laplacian_apply(const WeightedGraph& graph, std::span<const double> f) {
  require(f.size() == graph.num_vertices(), ErrorCode::invalid_argument,
          "field has wrong size");
  std::vector<double> out(f.size(), 0.0);
  for (Vertex x = 0; x < static_cast<Vertex>(f.size()); ++x) {
    auto nbrs = graph.neighbors(x);
    auto cs = graph.conductances(x);
    double acc = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) acc += cs[k] * (f[x] - f[nbrs[k]]);
    out[x] = acc;
  }
  return out;
}

double dirichlet_energy(const WeightedGraph& graph, std::span<const double> f) {
  require(f.size() == graph.num_vertices(), ErrorCode::invalid_argument,
          "field has wrong size");
  double total = 0.0;
  for (const Edge& e : graph.edges()) {
    double d = f[e.u] - f[e.v];
    total += e.c * d * d;
  }
  return total;
}

double dirichlet_energy(const WeightedGraph& graph, const Flow& flow) {
  require(flow.values.size() == graph.num_edges(), ErrorCode::invalid_argument,
          "flow has wrong size");
  double total = 0.0;
  for (std::size_t i = 0; i < flow.values.size(); ++i) {
    total += flow.values[i] * flow.values[i] / graph.edges()[i].c;
  }
  return total;
}

namespace {

void check_boundary(const WeightedGraph& graph, std::span<const Vertex> A,
                    std::span<const double> phi) {
  require(!A.empty(), ErrorCode::invalid_argument, "boundary set is empty");
  require(A.size() == phi.size(), ErrorCode::invalid_argument,
          "boundary values do not match the boundary set");
  std::vector<char> seen(graph.num_vertices(), 0);
  for (Vertex a : A) {
    require(a >= 0 && static_cast<std::size_t>(a) < graph.num_vertices(),
            ErrorCode::invalid_argument, "boundary vertex outside the window");
    require(!seen[a], ErrorCode::invalid_argument, "boundary vertex listed twice");
    seen[a] = 1;
  }
}

PotentialField make_field(const WeightedGraph& graph, std::vector<double> values,
                          BoundaryKind kind, std::span<const Vertex> A,
                          std::span<const double> phi, const detail::DirichletSolver& solver) {
  PotentialField field;
  field.values = std::move(values);
  field.kind = kind;
  field.boundary.assign(A.begin(), A.end());
  field.boundary_values.assign(phi.begin(), phi.end());
  field.energy = dirichlet_energy(graph, field.values);
  field.max_residual = solver.last_max_residual();
  field.iterations = solver.last_iterations();
  return field;
}

std::vector<double> scatter(std::size_t n, std::span<const Vertex> A, std::span<const double> phi) {
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < A.size(); ++i) out[A[i]] = phi[i];
  return out;
}

std::vector<Vertex> check_K(const WeightedGraph& graph, std::span<const Vertex> K,
                            std::optional<Vertex> forbidden) {
  require(!K.empty(), ErrorCode::invalid_argument, "K is empty");
  std::vector<char> seen(graph.num_vertices(), 0);
  for (Vertex k : K) {
    require(k >= 0 && static_cast<std::size_t>(k) < graph.num_vertices(),
            ErrorCode::invalid_argument, "K leaves the window");
    require(!forbidden || k != *forbidden, ErrorCode::invalid_argument, "K contains z");
    require(!seen[k], ErrorCode::invalid_argument, "K lists a vertex twice");
    seen[k] = 1;
  }
  return {K.begin(), K.end()};
}

}  // namespace

PotentialField solve_harmonic(const WeightedGraph& graph, std::span<const Vertex> A,
                              std::span<const double> phi, const SolverOptions& options) {
  check_boundary(graph, A, phi);
  detail::DirichletSolver solver(graph, A, options);
  auto values = solver.solve(scatter(graph.num_vertices(), A, phi));
  return make_field(graph, std::move(values), BoundaryKind::free, A, phi, solver);
}

PotentialField solve_harmonic(const WiredQuotient& quotient, std::span<const Vertex> A,
                              std::span<const double> phi, const SolverOptions& options) {
  const auto& g = quotient.graph;
  check_boundary(g, A, phi);
  std::vector<Vertex> fixed(A.begin(), A.end());
  std::vector<double> values(phi.begin(), phi.end());
  if (std::find(fixed.begin(), fixed.end(), quotient.zed) == fixed.end()) {
    fixed.push_back(quotient.zed);
    values.push_back(0.0);
  }
  detail::DirichletSolver solver(g, fixed, options);
  auto f = solver.solve(scatter(g.num_vertices(), fixed, values));
  return make_field(g, std::move(f), BoundaryKind::wired, fixed, values, solver);
}

Matrix GreenColumns::restricted() const {
  Matrix m(K.size());
  for (std::size_t i = 0; i < K.size(); ++i) {
    for (std::size_t j = 0; j < K.size(); ++j) m(i, j) = columns[j][K[i]];
  }
  return m;
}

std::vector<double> GreenColumns::apply(std::span<const double> f_on_K) const {
  require(f_on_K.size() == K.size(), ErrorCode::invalid_argument,
          "function on K has wrong size");
  std::vector<double> out(columns.empty() ? 0 : columns.front().size(), 0.0);
  for (std::size_t j = 0; j < K.size(); ++j) {
    for (std::size_t x = 0; x < out.size(); ++x) out[x] += columns[j][x] * f_on_K[j];
  }
  return out;
}

GreenColumns green_columns(const WiredQuotient& quotient, std::span<const Vertex> K,
                           const SolverOptions& options) {
  const auto& g = quotient.graph;
  GreenColumns out;
  out.K = check_K(g, K, quotient.zed);
  Vertex z = quotient.zed;
  detail::DirichletSolver solver(g, std::span<const Vertex>(&z, 1), options);
  std::vector<double> zero(g.num_vertices(), 0.0);
  for (Vertex k : out.K) {
    std::vector<double> source(g.num_vertices(), 0.0);
    source[k] = 1.0;
    out.columns.push_back(solver.solve(zero, source));
  }
  return out;
}

Matrix green_matrix(const WiredQuotient& quotient, std::span<const Vertex> K,
                    const SolverOptions& options) {
  return green_columns(quotient, K, options).restricted();
}

Equilibrium equilibrium_measure(const WiredQuotient& quotient, std::span<const Vertex> K,
                                const SolverOptions& options) {
  const auto& g = quotient.graph;
  auto ks = check_K(g, K, quotient.zed);
  std::vector<double> ones(ks.size(), 1.0);
  Equilibrium eq;
  eq.voltage = solve_harmonic(quotient, ks, ones, options);
  const auto& phi = eq.voltage.values;
  eq.measure.support = ks;
  for (Vertex y : ks) {
    auto nbrs = g.neighbors(y);
    auto cs = g.conductances(y);
    double e = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) e += cs[k] * (1.0 - phi[nbrs[k]]);
    eq.measure.mass.push_back(std::max(e, 0.0));
  }
  eq.capacity = eq.measure.total();
  require(eq.capacity > 0.0, ErrorCode::singular, "K has zero capacity in this window");
  eq.normalized = eq.measure.normalized();
  return eq;
}

Measure HarmonicMeasureFields::at(Vertex x) const {
  Measure m;
  m.support = K;
  for (const auto& f : fields) m.mass.push_back(std::clamp(f.values[x], 0.0, 1.0));
  return m;
}

bool HarmonicMeasureFields::degenerate(Vertex x) const {
  return std::find(K.begin(), K.end(), x) != K.end();
}

namespace {

HarmonicMeasureFields harmonic_fields_on(const WeightedGraph& g, std::span<const Vertex> K,
                                         BoundaryKind kind, const SolverOptions& options) {
  HarmonicMeasureFields out;
  out.K.assign(K.begin(), K.end());
  detail::DirichletSolver solver(g, K, options);
  for (std::size_t i = 0; i < K.size(); ++i) {
    std::vector<double> phi(K.size(), 0.0);
    phi[i] = 1.0;
    auto values = solver.solve(scatter(g.num_vertices(), K, phi));
    out.fields.push_back(make_field(g, std::move(values), kind, K, phi, solver));
  }
  return out;
}

}  // namespace

HarmonicMeasureFields harmonic_measure_fields(const WeightedGraph& graph,
                                              std::span<const Vertex> K,
                                              const SolverOptions& options) {
  auto ks = check_K(graph, K, std::nullopt);
  return harmonic_fields_on(graph, ks, BoundaryKind::free, options);
}

HarmonicMeasureFields harmonic_measure_fields(const WiredQuotient& quotient,
                                              std::span<const Vertex> K,
                                              const SolverOptions& options) {
  auto ks = check_K(quotient.graph, K, quotient.zed);
  return harmonic_fields_on(quotient.graph, ks, BoundaryKind::wired, options);
}

EntryMeasure entry_measure_free(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                int n, std::span<const Vertex> K, Vertex probe,
                                const SolverOptions& options) {
  for (Vertex k : K) {
    require(exhaustion.contains(n, k), ErrorCode::invalid_argument, "K is not inside VG_n");
  }
  require(exhaustion.contains(n, probe), ErrorCode::invalid_argument,
          "probe is not inside VG_n");
  EntryMeasure out;
  if (std::find(K.begin(), K.end(), probe) != K.end()) {
    out.measure.support.assign(K.begin(), K.end());
    for (Vertex k : K) out.measure.mass.push_back(k == probe ? 1.0 : 0.0);
    out.degenerate = true;
    return out;
  }
  auto fw = free_window(graph, exhaustion, n);
  std::vector<Vertex> local;
  for (Vertex k : K) local.push_back(fw.from_base[k]);
  auto fields = harmonic_measure_fields(fw.graph, local, options);
  out.measure = fields.at(fw.from_base[probe]);
  out.measure.support.assign(K.begin(), K.end());
  return out;
}

UnitCurrent unit_current(const WeightedGraph& graph, std::span<const Vertex> A,
                         std::span<const Vertex> B, BoundaryKind kind,
                         const SolverOptions& options) {
  require(!A.empty() && !B.empty(), ErrorCode::invalid_argument, "A and B must be nonempty");
  for (Vertex a : A) {
    require(std::find(B.begin(), B.end(), a) == B.end(), ErrorCode::invalid_argument,
            "A and B intersect");
  }
  std::vector<Vertex> fixed(A.begin(), A.end());
  fixed.insert(fixed.end(), B.begin(), B.end());
  std::vector<double> phi(A.size(), 1.0);
  phi.resize(fixed.size(), 0.0);
  check_boundary(graph, fixed, phi);

  detail::DirichletSolver solver(graph, fixed, options);
  auto v = solver.solve(scatter(graph.num_vertices(), fixed, phi));
  double current = 0.0;
  for (Vertex a : A) {
    auto nbrs = graph.neighbors(a);
    auto cs = graph.conductances(a);
    for (std::size_t k = 0; k < nbrs.size(); ++k) current += cs[k] * (v[a] - v[nbrs[k]]);
  }
  require(current > 0.0, ErrorCode::singular, "no current flows from A to B");

  UnitCurrent out;
  out.resistance = 1.0 / current;
  for (double& x : v) x *= out.resistance;
  for (double& p : phi) p *= out.resistance;
  out.flow = gradient_flow(graph, v);
  out.voltage = make_field(graph, std::move(v), kind, fixed, phi, solver);
  out.voltage.max_residual *= out.resistance;
  return out;
}

UnitCurrent unit_current_to_infinity(const WiredQuotient& quotient, std::span<const Vertex> A,
                                     const SolverOptions& options) {
  Vertex z = quotient.zed;
  return unit_current(quotient.graph, A, std::span<const Vertex>(&z, 1), BoundaryKind::wired,
                      options);
}

double effective_resistance(const WeightedGraph& graph, Vertex a, Vertex b,
                            const SolverOptions& options) {
  return unit_current(graph, std::span<const Vertex>(&a, 1), std::span<const Vertex>(&b, 1),
                      BoundaryKind::free, options)
      .resistance;
}

Flow gradient_flow(const WeightedGraph& graph, std::span<const double> f) {
  Flow flow;
  flow.values.reserve(graph.num_edges());
  for (const Edge& e : graph.edges()) flow.values.push_back(e.c * (f[e.u] - f[e.v]));
  flow.energy = dirichlet_energy(graph, flow);
  return flow;
}

std::vector<double> divergence(const WeightedGraph& graph, const Flow& flow) {
  std::vector<double> out(graph.num_vertices(), 0.0);
  for (std::size_t i = 0; i < graph.num_edges(); ++i) {
    const Edge& e = graph.edges()[i];
    out[e.u] += flow.values[i];
    out[e.v] -= flow.values[i];
  }
  return out;
}

double cycle_law_residual(const WeightedGraph& graph, const Flow& flow) {
  // integrate θ/c along a BFS tree; every non-tree edge closes one cycle
  const std::size_t n = graph.num_vertices();
  std::vector<double> pot(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<char> tree_edge(graph.num_edges(), 0);
  std::deque<Vertex> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    Vertex x = queue.front();
    queue.pop_front();
    auto nbrs = graph.neighbors(x);
    auto ids = graph.incident_edges(x);
    auto cs = graph.conductances(x);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      Vertex y = nbrs[k];
      if (seen[y]) continue;
      seen[y] = 1;
      tree_edge[ids[k]] = 1;
      pot[y] = pot[x] - flow.along(graph, ids[k], x) / cs[k];
      queue.push_back(y);
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < graph.num_edges(); ++i) {
    if (tree_edge[i]) continue;
    const Edge& e = graph.edges()[i];
    worst = std::max(worst, std::abs(pot[e.u] - pot[e.v] - flow.values[i] / e.c));
  }
  return worst;
}

Extrapolation extrapolate_limit(std::span<const double> sequence) {
  Extrapolation out;
  if (sequence.empty()) return out;
  out.value = sequence.back();
  if (sequence.size() < 3) return out;
  double x0 = sequence[sequence.size() - 3];
  double x1 = sequence[sequence.size() - 2];
  double x2 = sequence.back();
  double d1 = x1 - x0;
  double d2 = x2 - x1;
  double denom = d2 - d1;
  if (d1 == 0.0 || denom == 0.0) return out;
  double ratio = d2 / d1;
  if (!(ratio > 0.0 && ratio < 1.0)) return out;
  out.value = x2 - d2 * d2 / denom;
  out.extrapolated = true;
  return out;
}

ProbeSpread probe_spread(std::span<const double> values, std::span<const Vertex> probes) {
  ProbeSpread out;
  if (probes.empty()) return out;
  out.min = values[probes.front()];
  out.max = out.min;
  double sum = 0.0;
  for (Vertex p : probes) {
    double v = values[p];
    out.min = std::min(out.min, v);
    out.max = std::max(out.max, v);
    sum += v;
  }
  out.count = probes.size();
  out.mean = sum / static_cast<double>(out.count);
  return out;
}

}  // namespace interlab
