#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "interlab/compare.hpp"

using namespace interlab;

namespace {

Measure random_measure(std::mt19937_64& gen, int atoms) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Measure m;
  double total = 0.0;
  for (int i = 0; i < atoms; ++i) {
    if (u(gen) < 0.3) continue;
    m.support.push_back(i);
    m.mass.push_back(u(gen));
    total += m.mass.back();
  }
  if (m.support.empty()) return Measure::point(0);
  for (double& x : m.mass) x /= total;
  return m;
}

TimedPath random_path(std::mt19937_64& gen, int states) {
  std::uniform_real_distribution<double> gap(0.05, 1.5);
  std::uniform_int_distribution<int> state(0, states - 1);
  std::uniform_int_distribution<int> length(1, 12);
  TimedPath p;
  double t = 0.0;
  for (int i = length(gen); i > 0; --i) {
    p.times.push_back(t);
    p.states.push_back(state(gen));
    t += gap(gen);
  }
  p.end = t;
  return p;
}

double riemann(const TimedPath& f, const TimedPath& g, double dt, double until) {
  double s = 0.0;
  for (double t = 0.5 * dt; t < until; t += dt) {
    if (f.at(t) != g.at(t)) s += std::exp(-t) * dt;
  }
  return s;
}

PointSample hand_sample(std::vector<std::vector<Vertex>> paths, std::vector<double> labels) {
  PointSample s;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    Excursion e;
    e.path = paths[i];
    e.holds.assign(e.path.size(), 0.5);
    e.label = labels[i];
    s.excursions.push_back(e);
  }
  return s;
}

}  // namespace

TEST_CASE("TV distance examples") {
  Measure a{{0, 1}, {0.5, 0.5}};
  Measure b{{0, 1}, {0.9, 0.1}};
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(a, b) == doctest::Approx(0.4));
  CHECK(tv_distance(Measure::point(3), Measure::point(4)) == 1.0);
  Measure c{{1, 7}, {0.5, 0.5}};
  CHECK(tv_distance(a, c) == doctest::Approx(0.5));
  Measure heavy{{0}, {1.5}};
  CHECK_THROWS_AS(tv_distance(a, heavy), Error);
}

TEST_CASE("TV distance is a metric on random measures") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 500; ++trial) {
    auto a = random_measure(gen, 6), b = random_measure(gen, 6), c = random_measure(gen, 6);
    double ab = tv_distance(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0 + 1e-12);
    CHECK(ab == doctest::Approx(tv_distance(b, a)));
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(ab <= tv_distance(a, c) + tv_distance(c, b) + 1e-12);
  }
}

TEST_CASE("empirical TV bands cover the plug-in estimate") {
  std::mt19937_64 gen(12);
  Rng rng(13);
  Measure law{{0, 1, 2}, {0.2, 0.3, 0.5}};
  std::discrete_distribution<int> draw({0.2, 0.3, 0.5});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vertex> a, b;
    for (int i = 0; i < 300; ++i) a.push_back(draw(gen));
    for (int i = 0; i < 200; ++i) b.push_back(draw(gen));
    auto one = empirical_tv(a, law, 200, rng);
    CHECK(one.band.lo <= one.tv);
    CHECK(one.tv <= one.band.hi);
    CHECK(one.size_a == 300);
    auto two = empirical_tv(a, b, 200, rng);
    CHECK(two.band.lo <= two.tv);
    CHECK(two.tv <= two.band.hi);
    CHECK(two.size_b == 200);
  }
  std::vector<Vertex> ones(50, 1);
  CHECK(empirical_measure(ones).at(1) == 1.0);
}

TEST_CASE("path metric examples") {
  TimedPath a{{0.0}, {0}, std::numeric_limits<double>::infinity()};
  TimedPath b{{0.0}, {1}, std::numeric_limits<double>::infinity()};
  CHECK(path_metric(a, a).d == 0.0);
  CHECK(path_metric(a, b).d == doctest::Approx(1.0).epsilon(1e-15));

  TimedPath f{{0.0, 1.0, 2.0}, {0, 1, 0}, std::numeric_limits<double>::infinity()};
  CHECK(path_metric(f, a).d == doctest::Approx(std::exp(-1.0) - std::exp(-2.0)).epsilon(1e-14));

  auto capped = path_metric(a, b, 5.0);
  CHECK(capped.d == doctest::Approx(1.0 - std::exp(-5.0)));
  CHECK(capped.tail_bound == doctest::Approx(std::exp(-5.0)));

  TimedPath bad{{0.0, 2.0, 1.0}, {0, 1, 0}, 3.0};
  CHECK_THROWS_AS(path_metric(bad, a), Error);
}

TEST_CASE("path metric agrees with a Riemann sum on random paths") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 40; ++trial) {
    auto f = random_path(gen, 3);
    auto g = random_path(gen, 3);
    double exact = path_metric(f, g).d;
    CHECK(exact >= 0.0);
    CHECK(exact <= 1.0);
    CHECK(std::abs(exact - riemann(f, g, 1e-4, 40.0)) <= 1e-3);
    CHECK(path_metric(f, f).d == 0.0);
  }
}

TEST_CASE("timed paths from trajectories skip markers") {
  Trajectory t{{kInf, 4, 5, kInf, 6}, {0.0, 0.5, 0.25, 0.0, 1.0}, StartMode::from_infinity};
  auto p = timed_path(t);
  CHECK(p.states == std::vector<Vertex>{4, 5, 6});
  CHECK(p.times == std::vector<double>{0.0, 0.5, 0.75});
  CHECK(p.end == 1.75);
  CHECK(p.at(0.6) == 5);
  CHECK(p.at(2.0) == kCemetery);
  Trajectory bare{{1, 2}, {}};
  CHECK_THROWS_AS(timed_path(bare), Error);
}

TEST_CASE("truncated processes on hand-made samples") {
  auto w = fixture::zd(4);
  const auto& ex = w.exhaustion;
  auto v = [&](const char* name) { return fixture::id(w.graph, name); };
  // one excursion inside VG_1 only
  auto inside = hand_sample({{v("1,0,0"), v("0,0,0"), v("0,1,0")}}, {0.3});
  std::vector<int> levels{1, 2, 3};
  Rng rng(1);
  auto curve = truncation_curve(std::span<const PointSample>(&inside, 1), ex, levels, 4, 50, rng);
  for (double m : curve.mean) CHECK(m == 0.0);

  // the second excursion never reaches VG_1
  auto mixed = hand_sample({{v("3,0,0"), v("2,0,0"), v("1,0,0"), v("0,0,0")},
                            {v("0,3,0"), v("0,2,0"), v("0,3,0")}},
                           {0.7, 0.2});
  auto z4 = truncated_process(mixed, ex, 4);
  auto z1 = truncated_process(mixed, ex, 1);
  auto z2 = truncated_process(mixed, ex, 2);
  CHECK(z4.path.states.size() == 7);
  CHECK(z4.path.states.front() == v("0,3,0"));
  CHECK(z1.path.states == std::vector<Vertex>{v("1,0,0"), v("0,0,0")});
  CHECK(z2.path.states.size() == 5);
  CHECK(path_metric(z4.path, z4.path).d == 0.0);
  CHECK(z1.source == z4.source);

  auto other = hand_sample({{v("1,0,0")}}, {0.1});
  std::vector<std::vector<CoupledTrace>> bad{{z4, truncated_process(other, ex, 1)}};
  std::vector<int> one{1};
  CHECK_THROWS_AS(truncation_curve(bad, one, 4, 10, rng), Error);
  std::vector<int> above{5};
  std::vector<std::vector<CoupledTrace>> good{{z4, z1}};
  CHECK_THROWS_AS(truncation_curve(good, above, 4, 10, rng), Error);
}

TEST_CASE("truncation curve decreases on Z3") {
  auto w = fixture::zd(8);
  const auto& ex = w.exhaustion;
  auto level = ex.level(1);
  InterlacementSampler sampler(w.graph, ex, {level.begin(), level.end()});
  auto rates = default_rate(ex, 1.0, 2.0);
  std::vector<PointSample> samples;
  for (std::uint64_t r = 0; r < 200; ++r) {
    auto streams = SamplerStreams::from_seed(404, r);
    samples.push_back(sampler.sample(6.0 / sampler.capacity(), rates, streams));
  }
  std::vector<int> levels{1, 2, 3, 4, 5, 6, 7, 8};
  Rng rng(2);
  auto curve = truncation_curve(samples, ex, levels, 8, 200, rng);
  CHECK(curve.mean.back() == 0.0);
  CHECK(curve.mean.front() > curve.mean[3]);
  CHECK(curve.trend.rho < 0.0);
  CHECK(curve.trend.p_value < 0.01);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    CHECK(curve.band[i].lo <= curve.mean[i] + 1e-15);
    CHECK(curve.mean[i] <= curve.band[i].hi + 1e-15);
  }
  Rng again(2);
  auto twice = truncation_curve(samples, ex, levels, 8, 200, again, 3);
  CHECK(twice.mean == curve.mean);
}

TEST_CASE("trend classification") {
  Thresholds th;
  std::vector<double> down{0.05, 0.03, 0.01};
  CHECK(classify(down, 0.05, th) == Trend::decreasing);
  std::vector<double> slow{0.05, 0.04, 0.03};
  CHECK(classify(slow, 0.05, th) == Trend::undetermined);
  std::vector<double> flat{0.5, 0.5, 0.5, 0.5};
  CHECK(classify(flat, 0.05, th) == Trend::bounded_away);
  std::vector<double> sinking{0.9, 0.6, 0.3, 0.1};
  CHECK(classify(sinking, 0.05, th) == Trend::undetermined);
  std::vector<double> tiny{1e-4, 1e-4, 1e-4};
  CHECK(classify(tiny, 0.05, th) == Trend::undetermined);
  CHECK(to_string(Trend::bounded_away) == "bounded_away");
}

TEST_CASE("equivalence report is deterministic and degrades to inconclusive") {
  auto w = fixture::zd(7);
  auto K = fixture::ids(w.graph, {"0,0,0", "1,0,0"});
  Budgets b;
  b.first_level = 2;
  b.last_level = 6;
  b.entry_samples = 2000;
  b.seed = 5;
  auto r1 = equivalence_report(w.graph, w.exhaustion, K, b, {}, "zd_box");
  b.jobs = 3;
  auto r2 = equivalence_report(w.graph, w.exhaustion, K, b, {}, "zd_box");
  CHECK(r1.to_json().dump() == r2.to_json().dump());
  CHECK(r1.entry_tv.values.size() == 5);
  CHECK(r1.appendix_csv().rfind("level,diagnostic,value\n", 0) == 0);
  CHECK(r1.sampled_entry.outcome == "agrees");

  b.max_steps = 10;
  auto starved = equivalence_report(w.graph, w.exhaustion, K, b);
  CHECK(starved.partial);
  CHECK(starved.verdict == "inconclusive");
  CHECK_FALSE(starved.notes.empty());
  CHECK(starved.entry_tv.values.size() == 5);

  auto outside = fixture::ids(w.graph, {"0,0,0", "3,0,0"});
  CHECK_THROWS_AS(equivalence_report(w.graph, w.exhaustion, outside, b), Error);
}
