#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <functional>

#include "interlab/error.hpp"
#include "interlab/graph.hpp"

namespace interlab {

namespace {

constexpr double kMaxVertices = 4.0e6;

// Visits every point of [-r, r]^d in lexicographic order.
void for_each_point(int dim, int radius, const std::function<void(std::span<const int>)>& fn) {
  std::vector<int> p(dim, -radius);
  while (true) {
    fn(p);
    int k = dim - 1;
    while (k >= 0 && p[k] == radius) {
      p[k] = -radius;
      --k;
    }
    if (k < 0) break;
    ++p[k];
  }
}

int sup_norm(std::span<const int> p) {
  int m = 0;
  for (int v : p) m = std::max(m, std::abs(v));
  return m;
}

int l1_norm(std::span<const int> p) {
  int m = 0;
  for (int v : p) m += std::abs(v);
  return m;
}

void check_size(double count) {
  require(count <= kMaxVertices, ErrorCode::too_large,
          "requested window has too many vertices");
}

// Lattice box with an optional finite fiber attached at every site.
Window lattice_product(const FamilyParams& p, int fiber, double fiber_c,
                       const std::function<double(std::span<const int>)>& rung) {
  check_size(std::pow(2.0 * p.radius + 1.0, p.dim) * fiber);
  GraphBuilder b;
  std::vector<int> shell;
  auto name = [&](std::span<const int> x, int layer) {
    std::string s = lattice_name(x);
    if (fiber > 1) s += "|" + std::to_string(layer);
    return s;
  };
  for_each_point(p.dim, p.radius, [&](std::span<const int> x) {
    for (int layer = 0; layer < fiber; ++layer) {
      b.add_vertex(name(x, layer));
      shell.push_back(sup_norm(x));
    }
  });
  std::vector<int> q(p.dim);
  for_each_point(p.dim, p.radius, [&](std::span<const int> x) {
    for (int layer = 0; layer < fiber; ++layer) {
      Vertex here = b.add_vertex(name(x, layer));
      for (int k = 0; k < p.dim; ++k) {
        if (x[k] == p.radius) continue;
        std::copy(x.begin(), x.end(), q.begin());
        ++q[k];
        b.add_edge(here, b.add_vertex(name(q, layer)), 1.0);
      }
      if (fiber == 2 && layer == 0) {
        b.add_edge(here, b.add_vertex(name(x, 1)), rung ? rung(x) : fiber_c);
      } else if (fiber > 2) {
        b.add_edge(here, b.add_vertex(name(x, (layer + 1) % fiber)), fiber_c);
      }
    }
  });
  Window w;
  w.graph = std::move(b).build();
  w.exhaustion = Exhaustion(w.graph, std::move(shell));
  w.params = p;
  return w;
}

Window regular_tree(const FamilyParams& p) {
  check_size(std::pow(static_cast<double>(p.branching), p.radius + 1));
  GraphBuilder b;
  std::vector<int> shell;
  b.add_vertex("r");
  shell.push_back(0);
  std::vector<std::pair<Vertex, std::string>> frontier{{0, "r"}};
  for (int depth = 1; depth <= p.radius; ++depth) {
    std::vector<std::pair<Vertex, std::string>> next;
    next.reserve(frontier.size() * p.branching);
    for (const auto& [parent, label] : frontier) {
      for (int k = 0; k < p.branching; ++k) {
        std::string child = label + "." + std::to_string(k);
        Vertex id = b.add_vertex(child);
        shell.push_back(depth);
        b.add_edge(parent, id, 1.0);
        next.emplace_back(id, std::move(child));
      }
    }
    frontier = std::move(next);
  }
  Window w;
  w.graph = std::move(b).build();
  w.exhaustion = Exhaustion(w.graph, std::move(shell));
  w.params = p;
  return w;
}

// Z^d glued at the origin to N_0, with rungs k -- (k, 0, ..., 0). The window
// and its levels are balls in graph distance from the glue point.
Window ladder(const FamilyParams& p) {
  check_size(std::pow(2.0 * p.radius + 1.0, p.dim));
  GraphBuilder b;
  std::vector<int> q(p.dim);
  for_each_point(p.dim, p.radius, [&](std::span<const int> x) {
    if (l1_norm(x) > p.radius) return;
    Vertex here = b.add_vertex(lattice_name(x));
    for (int k = 0; k < p.dim; ++k) {
      std::copy(x.begin(), x.end(), q.begin());
      ++q[k];
      if (l1_norm(q) > p.radius) continue;
      b.add_edge(here, b.add_vertex(lattice_name(q)), 1.0);
    }
  });
  std::vector<int> origin(p.dim, 0);
  Vertex prev = b.add_vertex(lattice_name(origin));
  for (int k = 1; k <= p.radius; ++k) {
    Vertex nk = b.add_vertex("n" + std::to_string(k));
    b.add_edge(prev, nk, 1.0);
    prev = nk;
    if (p.ladder_ratio > 0.0) {
      std::vector<int> axis(p.dim, 0);
      axis[0] = k;
      b.add_edge(nk, b.add_vertex(lattice_name(axis)), std::pow(p.ladder_ratio, k));
    }
  }
  Window w;
  w.graph = std::move(b).build();
  std::vector<int> dist(w.graph.num_vertices(), -1);
  Vertex root = w.graph.vertex(lattice_name(origin));
  std::deque<Vertex> queue{root};
  dist[root] = 0;
  while (!queue.empty()) {
    Vertex x = queue.front();
    queue.pop_front();
    for (Vertex y : w.graph.neighbors(x)) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  w.exhaustion = Exhaustion(w.graph, std::move(dist));
  w.params = p;
  return w;
}

}  // namespace

std::string lattice_name(std::span<const int> coords) {
  std::string s;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(coords[i]);
  }
  return s;
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::zd_box: return "zd_box";
    case Family::regular_tree: return "regular_tree";
    case Family::product: return "product";
    case Family::ladder: return "ladder";
    case Family::two_sheet: return "two_sheet";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::zd_box, Family::regular_tree, Family::product, Family::ladder,
                   Family::two_sheet}) {
    if (to_string(f) == name) return f;
  }
  fail(ErrorCode::invalid_argument, "unknown family '" + std::string(name) + "'");
}

Window build_family(const FamilyParams& p) {
  require(p.radius >= 1, ErrorCode::invalid_argument,
          "radius must be at least 1 so the window has an exterior");
  auto need_transient_lattice = [&] {
    require(p.dim >= 3, ErrorCode::invalid_argument,
            std::string(to_string(p.family)) + " requires dim >= 3 (transience)");
  };
  switch (p.family) {
    case Family::zd_box:
      need_transient_lattice();
      return lattice_product(p, 1, 0.0, {});
    case Family::product:
      need_transient_lattice();
      require(p.fiber >= 2, ErrorCode::invalid_argument, "product requires fiber >= 2");
      require(p.fiber_conductance > 0.0, ErrorCode::invalid_argument,
              "fiber conductance must be positive");
      return lattice_product(p, p.fiber, p.fiber_conductance, {});
    case Family::two_sheet: {
      need_transient_lattice();
      const double exponent = -(p.dim + 1.0);
      return lattice_product(p, 2, 0.0, [exponent](std::span<const int> x) {
        return std::pow(l1_norm(x) + 1.0, exponent);
      });
    }
    case Family::ladder:
      need_transient_lattice();
      require(p.ladder_ratio >= 0.0 && p.ladder_ratio < 1.0, ErrorCode::invalid_argument,
              "ladder rungs must be summable: ratio in [0, 1)");
      return ladder(p);
    case Family::regular_tree:
      require(p.branching >= 2, ErrorCode::invalid_argument,
              "regular_tree requires branching >= 2");
      return regular_tree(p);
  }
  fail(ErrorCode::invalid_argument, "unknown family");
}

}  // namespace interlab
