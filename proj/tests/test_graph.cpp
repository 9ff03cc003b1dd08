#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "interlab/error.hpp"
#include "interlab/graph.hpp"

using namespace interlab;

namespace {

Window family(Family f, int radius, int dim = 3) {
  FamilyParams p;
  p.family = f;
  p.radius = radius;
  p.dim = dim;
  return build_family(p);
}

std::multiset<std::tuple<std::string, std::string, double>> edge_multiset(const WeightedGraph& g) {
  std::multiset<std::tuple<std::string, std::string, double>> out;
  for (const Edge& e : g.edges()) {
    auto a = g.name(e.u), b = g.name(e.v);
    if (b < a) std::swap(a, b);
    out.emplace(a, b, e.c);
  }
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::io;
}

// Connected random graph: a random spanning tree plus extra chords.
WeightedGraph random_graph(std::mt19937_64& rng, int n, int extra) {
  GraphBuilder b;
  for (int i = 0; i < n; ++i) b.add_vertex("v" + std::to_string(i));
  std::uniform_real_distribution<double> cond(0.1, 3.0);
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    b.add_edge(i, pick(rng), cond(rng));
  }
  std::uniform_int_distribution<int> any(0, n - 1);
  std::set<std::pair<int, int>> used;
  for (int k = 0; k < extra; ++k) {
    int a = any(rng), c = any(rng);
    if (a == c) continue;
    try {
      b.add_edge(a, c, cond(rng));
    } catch (const Error&) {
      // the pair already carries a different conductance
    }
  }
  return std::move(b).build();
}

}  // namespace

TEST_CASE("zd_box radius 1 counts") {
  auto w = family(Family::zd_box, 1);
  CHECK(w.graph.num_vertices() == 27);
  CHECK(w.graph.num_edges() == 54);
  for (const Edge& e : w.graph.edges()) CHECK(e.c == 1.0);
  CHECK(w.graph.pi(w.graph.vertex("0,0,0")) == 6.0);
  CHECK(w.exhaustion.window() == 1);
  CHECK(w.exhaustion.center() == w.graph.vertex("0,0,0"));
}

TEST_CASE("regular tree depth 3") {
  FamilyParams p;
  p.family = Family::regular_tree;
  p.radius = 3;
  auto w = build_family(p);
  CHECK(w.graph.num_vertices() == 15);
  CHECK(w.graph.degree(w.graph.vertex("r")) == 2);
  for (Vertex x = 0; x < static_cast<Vertex>(w.graph.num_vertices()); ++x) {
    int depth = w.exhaustion.shell(x);
    if (depth == 0) continue;
    CHECK(w.graph.degree(x) == (depth == 3 ? 1u : 3u));
  }
}

TEST_CASE("family preconditions") {
  FamilyParams p;
  p.dim = 2;
  CHECK(code_of([&] { build_family(p); }) == ErrorCode::invalid_argument);
  p.family = Family::two_sheet;
  CHECK(code_of([&] { build_family(p); }) == ErrorCode::invalid_argument);
  p = FamilyParams{};
  p.family = Family::regular_tree;
  p.branching = 1;
  CHECK(code_of([&] { build_family(p); }) == ErrorCode::invalid_argument);
  p = FamilyParams{};
  p.family = Family::ladder;
  p.ladder_ratio = 1.0;
  CHECK(code_of([&] { build_family(p); }) == ErrorCode::invalid_argument);
  p = FamilyParams{};
  p.radius = 0;
  CHECK(code_of([&] { build_family(p); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { parse_family("hypercube"); }) == ErrorCode::invalid_argument);
}

TEST_CASE("two-sheet rung conductances are summable and grow with the window") {
  double previous = 0.0;
  for (int r = 1; r <= 7; ++r) {
    auto w = family(Family::two_sheet, r);
    double rungs = 0.0;
    for (const Edge& e : w.graph.edges()) {
      const auto& a = w.graph.name(e.u);
      const auto& b = w.graph.name(e.v);
      if (a.substr(0, a.find('|')) == b.substr(0, b.find('|'))) {
        rungs += e.c;
      } else {
        CHECK(e.c == 1.0);
      }
    }
    // #{|x|_1 = n} <= 6 n^2 in three dimensions, so the sum is below 1 + 6 * pi^2 / 6
    CHECK(rungs <= 1.0 + M_PI * M_PI);
    CHECK(rungs > previous);
    previous = rungs;
  }
  auto w = family(Family::two_sheet, 2);
  CHECK(w.graph.conductance(w.graph.vertex("1,0,0|0"), w.graph.vertex("1,0,0|1")) ==
        doctest::Approx(1.0 / 16.0));
}

TEST_CASE("ladder and product families") {
  FamilyParams p;
  p.family = Family::ladder;
  p.radius = 4;
  auto w = build_family(p);
  auto& g = w.graph;
  CHECK(g.conductance(g.vertex("0,0,0"), g.vertex("n1")) == 1.0);
  CHECK(g.conductance(g.vertex("n3"), g.vertex("3,0,0")) == doctest::Approx(0.125));
  CHECK(w.exhaustion.shell(g.vertex("n3")) == 3);
  CHECK(w.exhaustion.shell(g.vertex("1,-1,2")) == 4);
  CHECK(!g.find("3,2,0").has_value());

  p.ladder_ratio = 0.0;
  auto plain = build_family(p);
  CHECK(plain.graph.num_edges() == g.num_edges() - 4);

  FamilyParams q;
  q.family = Family::product;
  q.radius = 1;
  q.fiber = 3;
  q.fiber_conductance = 0.5;
  auto prod = build_family(q);
  CHECK(prod.graph.num_vertices() == 81);
  CHECK(prod.graph.num_edges() == 54 * 3 + 27 * 3);
  CHECK(prod.graph.pi(prod.graph.vertex("0,0,0|1")) == doctest::Approx(7.0));
}

TEST_CASE("transition kernel rows sum to one on every family") {
  for (Family f : {Family::zd_box, Family::regular_tree, Family::product, Family::ladder,
                   Family::two_sheet}) {
    FamilyParams p;
    p.family = f;
    p.radius = 3;
    auto w = build_family(p);
    for (Vertex x = 0; x < static_cast<Vertex>(w.graph.num_vertices()); ++x) {
      double sum = 0.0;
      for (double c : w.graph.conductances(x)) sum += c / w.graph.pi(x);
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("exhaustion levels nest and stay connected") {
  for (Family f : {Family::zd_box, Family::regular_tree, Family::ladder, Family::two_sheet}) {
    FamilyParams p;
    p.family = f;
    p.radius = 4;
    auto w = build_family(p);
    const auto& ex = w.exhaustion;
    for (int n = 0; n < ex.window(); ++n) {
      auto small = ex.level(n);
      auto big = ex.level(n + 1);
      CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
      CHECK(big.size() > small.size());
      CHECK(free_window(w.graph, ex, n).graph.connected());
    }
    CHECK(ex.level(ex.window()).size() == w.graph.num_vertices());
  }
}

TEST_CASE("wire collapses the exterior") {
  auto w = family(Family::zd_box, 3);
  auto q = wire(w.graph, w.exhaustion, 1);
  CHECK(q.graph.pi(q.zed) == doctest::Approx(54.0));
  CHECK(cut_conductance(w.graph, w.exhaustion, 1) == doctest::Approx(54.0));
  CHECK(q.graph.connected());
  CHECK(code_of([&] { wire(w.graph, w.exhaustion, 3); }) == ErrorCode::invalid_argument);

  FamilyParams p;
  p.family = Family::regular_tree;
  p.radius = 4;
  auto t = build_family(p);
  auto qt = wire(t.graph, t.exhaustion, 2);
  CHECK(qt.graph.degree(qt.zed) == 4);
  for (Vertex y : qt.graph.neighbors(qt.zed)) {
    CHECK(t.exhaustion.shell(qt.to_base[y]) == 2);
    CHECK(qt.graph.conductance(y, qt.zed) == 2.0);
  }
}

TEST_CASE("wire conserves conductance on random exhaustions") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = random_graph(rng, 8 + trial % 10, 12);
    // shells by BFS distance from vertex 0 always give a valid exhaustion
    std::vector<int> shell(g.num_vertices(), -1);
    std::vector<Vertex> queue{0};
    shell[0] = 0;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      for (Vertex y : g.neighbors(queue[i])) {
        if (shell[y] < 0) {
          shell[y] = shell[queue[i]] + 1;
          queue.push_back(y);
        }
      }
    }
    Exhaustion ex(g, shell);
    for (int n = 0; n < ex.window(); ++n) {
      auto q = wire(g, ex, n);
      auto fw = free_window(g, ex, n);
      CHECK(q.graph.total_conductance() ==
            doctest::Approx(fw.graph.total_conductance() + cut_conductance(g, ex, n)));
      CHECK(q.graph.pi(q.zed) == doctest::Approx(cut_conductance(g, ex, n)));
      for (const Edge& e : fw.graph.edges()) {
        CHECK(q.graph.conductance(e.u, e.v) == e.c);
      }
    }
  }
}

TEST_CASE("edge list parsing") {
  auto g = read_graph("# one edge\na b 1.0\n");
  CHECK(g.num_vertices() == 2);
  CHECK(g.pi(0) == 1.0);
  CHECK(g.pi(1) == 1.0);

  CHECK(code_of([] { read_graph("a b 1\na b 2\n"); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { read_graph("a b 1\nb a 2\n"); }) == ErrorCode::asymmetric);
  CHECK(code_of([] { read_graph("a b 0\n"); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { read_graph("a b -1\n"); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { read_graph("a b 1\nc d 1\n"); }) == ErrorCode::disconnected);
  CHECK(code_of([] { read_graph("a b\n"); }) == ErrorCode::parse);
  CHECK(code_of([] { read_graph("a b x\n"); }) == ErrorCode::parse);
  CHECK(read_graph("a b 1\nb a 1\n").num_edges() == 1);
}

TEST_CASE("edge list round trip") {
  auto w = family(Family::zd_box, 2);
  auto text = write_graph(w.graph);
  auto back = read_graph(text);
  CHECK(edge_multiset(back) == edge_multiset(w.graph));

  auto ex = read_exhaustion(write_exhaustion(w.graph, w.exhaustion), back);
  for (Vertex x = 0; x < static_cast<Vertex>(back.num_vertices()); ++x) {
    CHECK(ex.shell(x) == w.exhaustion.shell(w.graph.vertex(back.name(x))));
  }
  CHECK(code_of([&] { read_exhaustion("0,0,0\n1,0,0\n", back); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { read_exhaustion("0,0,0\n1,0,0 0,0,0 9\n", back); }) == ErrorCode::parse);
}

TEST_CASE("round trip on random graphs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    auto g = random_graph(rng, 3 + trial, 2 * trial);
    CHECK(edge_multiset(read_graph(write_graph(g))) == edge_multiset(g));
  }
}

TEST_CASE("vertex name resolution") {
  auto w = family(Family::zd_box, 1);
  std::vector<std::string> ok{"0,0,0", "1,0,0"};
  CHECK(resolve_vertices(w.graph, ok).size() == 2);
  std::vector<std::string> twice{"0,0,0", "0,0,0"};
  CHECK(code_of([&] { resolve_vertices(w.graph, twice); }) == ErrorCode::invalid_argument);
  std::vector<std::string> missing{"5,0,0"};
  CHECK(code_of([&] { resolve_vertices(w.graph, missing); }) == ErrorCode::invalid_argument);
}
