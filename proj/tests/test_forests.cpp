#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "interlab/forests.hpp"
#include "interlab/stats.hpp"
#include "oracles.hpp"

using namespace interlab;

namespace {

WeightedGraph complete4(double heavy) {
  return fixture::graph({{"a", "b", heavy},
                         {"a", "c", 1.0},
                         {"a", "d", 1.0},
                         {"b", "c", 1.0},
                         {"b", "d", 1.0},
                         {"c", "d", 1.0}});
}

WeightedGraph random_graph(std::mt19937_64& rng, int n, int extra) {
  GraphBuilder b;
  for (int i = 0; i < n; ++i) b.add_vertex("v" + std::to_string(i));
  std::uniform_real_distribution<double> cond(0.2, 4.0);
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    b.add_edge(i, pick(rng), cond(rng));
  }
  std::uniform_int_distribution<int> any(0, n - 1);
  for (int k = 0; k < extra; ++k) {
    int a = any(rng), c = any(rng);
    if (a == c) continue;
    try {
      b.add_edge(a, c, cond(rng));
    } catch (const Error&) {
      // this pair already has an edge
    }
  }
  return std::move(b).build();
}

/// Chi-square of sampled tree frequencies against the enumerated law.
double tree_law_p_value(const WeightedGraph& g, const std::function<Forest(Rng&)>& sampler,
                        int samples, std::uint64_t seed) {
  auto law = enumerate_trees(g);
  std::map<std::vector<std::size_t>, std::size_t> index;
  for (std::size_t i = 0; i < law.trees.size(); ++i) index[law.trees[i]] = i;
  std::vector<double> counts(law.trees.size(), 0.0);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    auto f = sampler(rng);
    REQUIRE(is_spanning_tree(g, f));
    counts[index.at(tree_edges(g, f))] += 1.0;
  }
  return chi_square_gof(counts, law.probability).p_value;
}

}  // namespace

TEST_CASE("enumeration on small graphs") {
  auto tri = fixture::graph({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
  auto law = enumerate_trees(tri);
  REQUIRE(law.trees.size() == 3);
  for (double p : law.probability) CHECK(p == doctest::Approx(1.0 / 3.0));

  auto path = fixture::graph({{"a", "b", 2.0}, {"b", "c", 0.5}, {"c", "d", 1.0}});
  auto one = enumerate_trees(path);
  REQUIRE(one.trees.size() == 1);
  CHECK(one.weight[0] == 1.0);
  CHECK(one.probability[0] == 1.0);

  auto k4 = enumerate_trees(complete4(3.0));
  CHECK(k4.trees.size() == 16);

  auto weighted = fixture::graph({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 2.0}});
  auto wl = enumerate_trees(weighted);
  CHECK(wl.partition == doctest::Approx(5.0));
  for (std::size_t i = 0; i < wl.trees.size(); ++i) {
    double w = 1.0;
    for (std::size_t e : wl.trees[i]) w *= weighted.edges()[e].c;
    CHECK(wl.probability[i] == doctest::Approx(w / 5.0));
  }

  auto big = fixture::zd(1);
  CHECK_THROWS_AS(enumerate_trees(big.graph), Error);
}

TEST_CASE("partition function equals the Laplacian cofactor") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_graph(rng, 4 + trial % 5, 6);
    auto law = enumerate_trees(g);
    double z = oracle::tree_partition(g);
    CHECK(std::abs(law.partition - z) <= 1e-9 * z);
  }
}

TEST_CASE("Wilson on the path returns the path") {
  auto path = fixture::graph({{"a", "b", 2.0}, {"b", "c", 0.5}, {"c", "d", 1.0}});
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    auto f = wilson(path, static_cast<Vertex>(i % 4), rng);
    CHECK(is_spanning_tree(path, f));
    CHECK(tree_edges(path, f) == std::vector<std::size_t>{0, 1, 2});
  }
}

TEST_CASE("Wilson matches the enumerated law on the weighted triangle and K4") {
  auto tri = fixture::graph({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 2.0}});
  CHECK(tree_law_p_value(tri, [&](Rng& r) { return wilson(tri, 0, r); }, 50000, 3) > 0.01);
  auto k4 = complete4(3.0);
  CHECK(tree_law_p_value(k4, [&](Rng& r) { return wilson(k4, 2, r); }, 100000, 4) > 0.01);
}

TEST_CASE("Wilson always returns a spanning tree") {
  std::mt19937_64 gen(5);
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_graph(gen, 3 + trial % 30, trial % 17);
    auto root = static_cast<Vertex>(gen() % g.num_vertices());
    auto f = wilson(g, root, rng);
    CHECK(is_spanning_tree(g, f));
    CHECK(f.roots == std::vector<Vertex>{root});
    CHECK(tree_edges(g, f).size() == g.num_vertices() - 1);
  }
}

TEST_CASE("spanning tree check rejects cycles and missing edges") {
  auto tri = fixture::graph({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
  Forest cyc;
  cyc.parent = {kRoot, 2, 1};
  CHECK_FALSE(is_spanning_tree(tri, cyc));
  auto path = fixture::graph({{"a", "b", 1.0}, {"b", "c", 1.0}});
  Forest skip;
  skip.parent = {kRoot, 0, 0};
  CHECK_FALSE(is_spanning_tree(path, skip));
  Forest two;
  two.parent = {kRoot, 0, kRoot};
  CHECK_FALSE(is_spanning_tree(path, two));
}

TEST_CASE("Aldous-Broder extraction on hand-written traces") {
  // a=0 b=1 c=2 d=3
  Trajectory single{{0, 1, 2}, {}};
  std::vector<Vertex> abc{0, 1, 2};
  auto f = aldous_broder_extract(single, ABMode::from_start, abc, 4);
  CHECK(f.parent[0] == kRoot);
  CHECK(f.parent[1] == 0);
  CHECK(f.parent[2] == 1);
  CHECK(f.roots == std::vector<Vertex>{0});
  CHECK(f.coverage == 1.0);

  Trajectory two{{kInf, 0, 1, kInf, 3, 2}, {}};
  std::vector<Vertex> all{0, 1, 2, 3};
  auto g = aldous_broder_extract(two, ABMode::after_first_inf, all, 4);
  CHECK(g.roots == std::vector<Vertex>{0, 3});
  CHECK(g.parent[0] == kRoot);
  CHECK(g.parent[3] == kRoot);
  CHECK(g.parent[1] == 0);
  CHECK(g.parent[2] == 3);

  Trajectory late{{0, 1, kInf, 2, 1, 0}, {}};
  auto h = aldous_broder_extract(late, ABMode::after_first_inf, abc, 4);
  CHECK(h.parent[2] == kRoot);
  CHECK(h.parent[1] == 2);
  CHECK(h.parent[0] == 1);

  Trajectory partial{{kInf, 0, 1}, {}};
  auto p = aldous_broder_extract(partial, ABMode::after_first_inf, all, 4);
  CHECK(p.coverage == doctest::Approx(0.5));
  CHECK(p.parent[2] == kAbsent);
}

TEST_CASE("Aldous-Broder on a covering walk samples the tree law") {
  auto k4 = complete4(3.0);
  auto sampler = [&](Rng& r) {
    std::vector<char> seen(4, 0);
    int remaining = 3;
    seen[0] = 1;
    Trajectory t{{0}, {}};
    Vertex x = 0;
    while (remaining > 0) {
      x = step(k4, x, r);
      t.steps.push_back(x);
      if (!seen[x]) {
        seen[x] = 1;
        --remaining;
      }
    }
    std::vector<Vertex> all{0, 1, 2, 3};
    return aldous_broder_extract(t, ABMode::from_start, all, 4);
  };
  CHECK(tree_law_p_value(k4, sampler, 50000, 9) > 0.01);
}

TEST_CASE("exact marginals: bridges, the triangle and K4") {
  auto lollipop = fixture::graph({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}, {"c", "d", 0.3}});
  auto m = exact_marginals(lollipop, BoundaryKind::free, SolverOptions{1e-13});
  CHECK(m.probability[3] == doctest::Approx(1.0).epsilon(1e-10));

  auto tri = fixture::graph({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
  auto t = exact_marginals(tri, BoundaryKind::free, SolverOptions{1e-13});
  for (double p : t.probability) CHECK(p == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(std::accumulate(t.probability.begin(), t.probability.end(), 0.0) ==
        doctest::Approx(2.0).epsilon(1e-10));

  auto k4 = complete4(3.0);
  auto law = enumerate_trees(k4);
  std::vector<double> oracle(k4.num_edges(), 0.0);
  for (std::size_t i = 0; i < law.trees.size(); ++i) {
    for (std::size_t e : law.trees[i]) oracle[e] += law.probability[i];
  }
  auto exact = exact_marginals(k4, BoundaryKind::free, SolverOptions{1e-14});
  for (std::size_t e = 0; e < k4.num_edges(); ++e) {
    CHECK(std::abs(exact.probability[e] - oracle[e]) <= 1e-9);
  }
  auto path = fixture::graph({{"a", "b", 1.0}, {"b", "c", 1.0}});
  std::vector<VertexPair> gap{{0, 2}};
  CHECK_THROWS_AS(exact_marginals(path, gap, BoundaryKind::free), Error);
}

TEST_CASE("marginals sum to the number of tree edges") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 15; ++trial) {
    auto g = random_graph(gen, 5 + trial * 3, 2 * trial + 3);
    auto m = exact_marginals(g, BoundaryKind::free, SolverOptions{1e-13});
    double s = std::accumulate(m.probability.begin(), m.probability.end(), 0.0);
    CHECK(std::abs(s - double(g.num_vertices() - 1)) <= 1e-6);
    for (double p : m.probability) CHECK((p >= 0.0 && p <= 1.0));
  }
  auto w = fixture::zd(4);
  for (int n : {1, 2, 3}) {
    auto q = wire(w.graph, w.exhaustion, n);
    auto m = exact_marginals(q.graph, BoundaryKind::wired, SolverOptions{1e-12});
    double s = std::accumulate(m.probability.begin(), m.probability.end(), 0.0);
    CHECK(std::abs(s - double(q.graph.num_vertices() - 1)) <= 1e-6);
  }
}

TEST_CASE("central panel is ordered by distance from the center") {
  auto w = fixture::zd(3);
  auto panel = central_panel(w.graph, w.exhaustion, 20);
  REQUIRE(panel.size() == 20);
  const Vertex c = w.exhaustion.center();
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK((panel[i].first == c || panel[i].second == c));
  }
  for (auto [u, v] : panel) {
    CHECK(w.graph.conductance(u, v) > 0.0);
    CHECK(w.exhaustion.contains(2, u));
    CHECK(w.exhaustion.contains(2, v));
  }
  auto again = central_panel(w.graph, w.exhaustion, 20);
  CHECK(again == panel);
}

TEST_CASE("free and wired panel marginals: lattice gap shrinks, tree gap stays") {
  auto z = fixture::zd(9);
  auto panel = central_panel(z.graph, z.exhaustion, 20);
  std::vector<double> gaps;
  for (int n = 2; n <= 8; n += 2) {
    auto f = panel_marginals(z.graph, z.exhaustion, n, panel, BoundaryKind::free, SolverOptions{1e-12});
    auto wd = panel_marginals(z.graph, z.exhaustion, n, panel, BoundaryKind::wired, SolverOptions{1e-12});
    CHECK(f.level == n);
    double gap = 0.0;
    for (std::size_t i = 0; i < panel.size(); ++i) {
      CHECK(f.probability[i] >= wd.probability[i] - 1e-9);
      gap = std::max(gap, f.probability[i] - wd.probability[i]);
    }
    gaps.push_back(gap);
  }
  for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < gaps[i - 1]);

  auto t = fixture::binary_tree(8);
  auto tree_panel = central_panel(t.graph, t.exhaustion, 6);
  for (int n = 2; n <= 7; ++n) {
    auto f = panel_marginals(t.graph, t.exhaustion, n, tree_panel, BoundaryKind::free, SolverOptions{1e-12});
    auto wd = panel_marginals(t.graph, t.exhaustion, n, tree_panel, BoundaryKind::wired, SolverOptions{1e-12});
    for (double p : f.probability) CHECK(p == doctest::Approx(1.0).epsilon(1e-9));
    for (double p : wd.probability) CHECK(p <= 0.9);
  }
  // the root edge of the wired quotient against the series-parallel recursion
  std::vector<VertexPair> root_edge{{fixture::id(t.graph, "r"), fixture::id(t.graph, "r.0")}};
  for (int n = 1; n <= 7; ++n) {
    auto wd = panel_marginals(t.graph, t.exhaustion, n, root_edge, BoundaryKind::wired, SolverOptions{1e-13});
    CHECK(wd.probability[0] == doctest::Approx(oracle::binary_tree_wired_root_child(n)).epsilon(1e-9));
  }
}

TEST_CASE("panel edges must lie inside the level") {
  auto z = fixture::zd(4);
  std::vector<VertexPair> outside{{fixture::id(z.graph, "3,0,0"), fixture::id(z.graph, "4,0,0")}};
  CHECK_THROWS_AS(panel_marginals(z.graph, z.exhaustion, 2, outside, BoundaryKind::free), Error);
}
