#include "interlab/compare.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "interlab/forests.hpp"
#include "interlab/hash.hpp"
#include "interlab/parallel.hpp"

namespace interlab {

double tv_distance(const Measure& a, const Measure& b) {
  require(std::abs(a.total() - 1.0) <= 1e-9 && std::abs(b.total() - 1.0) <= 1e-9,
          ErrorCode::invalid_argument, "TV distance needs probability measures");
  std::map<Vertex, double> diff;
  for (std::size_t i = 0; i < a.support.size(); ++i) diff[a.support[i]] += a.mass[i];
  for (std::size_t i = 0; i < b.support.size(); ++i) diff[b.support[i]] -= b.mass[i];
  double s = 0.0;
  for (const auto& [x, d] : diff) s += std::abs(d);
  return 0.5 * s;
}

Measure empirical_measure(std::span<const Vertex> samples) {
  require(!samples.empty(), ErrorCode::invalid_argument, "no samples");
  std::map<Vertex, double> counts;
  for (Vertex x : samples) counts[x] += 1.0;
  Measure m;
  const double n = static_cast<double>(samples.size());
  for (const auto& [x, c] : counts) {
    m.support.push_back(x);
    m.mass.push_back(c / n);
  }
  return m;
}

namespace {

// plug-in TV of a resample against a fixed law, via counts on a dense index
double resampled_tv(std::span<const std::size_t> idx, std::span<const std::size_t> cells_a,
                    std::span<const std::size_t> idx_b, std::span<const std::size_t> cells_b,
                    std::span<const double> exact, std::vector<double>& scratch) {
  std::fill(scratch.begin(), scratch.end(), 0.0);
  for (std::size_t i : idx) scratch[cells_a[i]] += 1.0 / static_cast<double>(idx.size());
  if (!idx_b.empty()) {
    for (std::size_t i : idx_b) scratch[cells_b[i]] -= 1.0 / static_cast<double>(idx_b.size());
  } else {
    for (std::size_t c = 0; c < exact.size(); ++c) scratch[c] -= exact[c];
  }
  double s = 0.0;
  for (double d : scratch) s += std::abs(d);
  return 0.5 * s;
}

struct Cells {
  std::map<Vertex, std::size_t> index;

  std::size_t of(Vertex x) {
    auto [it, inserted] = index.emplace(x, index.size());
    return it->second;
  }
};

void cover_estimate(TVReport& r) {
  // a percentile band of a biased statistic can miss the plug-in value
  r.band.lo = std::min(r.band.lo, r.tv);
  r.band.hi = std::max(r.band.hi, r.tv);
}

}  // namespace

TVReport empirical_tv(std::span<const Vertex> samples, const Measure& exact, std::size_t resamples,
                      Rng& rng) {
  TVReport r;
  r.a = empirical_measure(samples);
  r.b = exact;
  r.tv = tv_distance(r.a, r.b);
  r.size_a = samples.size();
  Cells cells;
  std::vector<std::size_t> cell_a;
  for (Vertex x : exact.support) cells.of(x);
  for (Vertex x : samples) cell_a.push_back(cells.of(x));
  std::vector<double> dense(cells.index.size(), 0.0);
  for (std::size_t i = 0; i < exact.support.size(); ++i) dense[cells.index[exact.support[i]]] += exact.mass[i];
  std::vector<double> scratch(dense.size());
  r.band = bootstrap_band(
      samples.size(),
      [&](std::span<const std::size_t> idx) {
        return resampled_tv(idx, cell_a, {}, {}, dense, scratch);
      },
      resamples, rng);
  cover_estimate(r);
  return r;
}

TVReport empirical_tv(std::span<const Vertex> a, std::span<const Vertex> b, std::size_t resamples,
                      Rng& rng) {
  require(resamples > 0, ErrorCode::invalid_argument, "empty bootstrap");
  TVReport r;
  r.a = empirical_measure(a);
  r.b = empirical_measure(b);
  r.tv = tv_distance(r.a, r.b);
  r.size_a = a.size();
  r.size_b = b.size();
  Cells cells;
  std::vector<std::size_t> cell_a, cell_b;
  for (Vertex x : a) cell_a.push_back(cells.of(x));
  for (Vertex x : b) cell_b.push_back(cells.of(x));
  std::vector<double> scratch(cells.index.size());
  std::vector<double> stats;
  std::vector<std::size_t> ia(a.size()), ib(b.size());
  for (std::size_t s = 0; s < resamples; ++s) {
    for (auto& i : ia) i = rng.below(a.size());
    for (auto& i : ib) i = rng.below(b.size());
    stats.push_back(resampled_tv(ia, cell_a, ib, cell_b, {}, scratch));
  }
  std::sort(stats.begin(), stats.end());
  auto pick = [&](double q) {
    auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1) + 0.5));
    return stats[std::min(k, resamples - 1)];
  };
  r.band = Band{pick(0.025), pick(0.975)};
  cover_estimate(r);
  return r;
}

Vertex TimedPath::at(double t) const {
  if (states.empty() || t >= end || t < times.front()) return kCemetery;
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return states[static_cast<std::size_t>(it - times.begin()) - 1];
}

TimedPath timed_path(const Trajectory& trajectory) {
  require(trajectory.holds.size() == trajectory.steps.size(), ErrorCode::invalid_argument,
          "timed path needs holding times");
  TimedPath p;
  double t = 0.0;
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    if (trajectory.steps[i] == kInf || trajectory.holds[i] <= 0.0) continue;
    p.times.push_back(t);
    p.states.push_back(trajectory.steps[i]);
    t += trajectory.holds[i];
  }
  p.end = t;
  return p;
}

namespace {

void check_sorted(const TimedPath& p) {
  require(p.times.size() == p.states.size(), ErrorCode::invalid_argument,
          "times and states differ in length");
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    bool ok = std::isfinite(p.times[i]) && (i == 0 || p.times[i] >= p.times[i - 1]);
    require(ok, ErrorCode::invalid_argument, "breakpoints are not sorted");
  }
  require(p.times.empty() || p.end >= p.times.back(), ErrorCode::invalid_argument,
          "path ends before its last breakpoint");
}

// ∫_a^b e^{-t} dt without cancellation
double exp_mass(double a, double b) {
  if (b <= a) return 0.0;
  if (std::isinf(b)) return std::exp(-a);
  return -std::exp(-a) * std::expm1(-(b - a));
}

}  // namespace

PathMetricValue path_metric(const TimedPath& f, const TimedPath& g, double horizon) {
  check_sorted(f);
  check_sorted(g);
  require(horizon > 0.0, ErrorCode::invalid_argument, "horizon must be positive");
  std::vector<double> cuts{0.0};
  auto add = [&](const TimedPath& p) {
    for (double t : p.times) cuts.push_back(t);
    cuts.push_back(p.end);
  };
  add(f);
  add(g);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  while (!cuts.empty() && cuts.back() > horizon) cuts.pop_back();
  if (cuts.back() < horizon) cuts.push_back(horizon);

  PathMetricValue out;
  out.horizon = horizon;
  out.tail_bound = std::isinf(horizon) ? 0.0 : std::exp(-horizon);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    if (f.at(a) != g.at(a)) out.d += exp_mass(a, b);
  }
  out.d = std::clamp(out.d, 0.0, 1.0);
  return out;
}

std::uint64_t fingerprint(const PointSample& sample) {
  Fnv1a h;
  h.u64(sample.excursions.size());
  h.real(sample.u_max);
  for (const auto& e : sample.excursions) {
    h.real(e.label);
    h.u64(e.root);
    for (Vertex x : e.path) h.u64(static_cast<std::uint64_t>(x));
    for (double t : e.holds) h.real(t);
  }
  return h.value();
}

CoupledTrace truncated_process(const PointSample& sample, const Exhaustion& exhaustion, int n) {
  require(n >= 0 && n <= exhaustion.window(), ErrorCode::invalid_argument,
          "truncation level outside the window");
  CoupledTrace out;
  out.source = fingerprint(sample);
  out.level = n;
  std::vector<std::size_t> order(sample.excursions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample.excursions[a].label < sample.excursions[b].label;
  });
  double t = 0.0;
  for (std::size_t m : order) {
    const auto& e = sample.excursions[m];
    auto first = std::find_if(e.path.begin(), e.path.end(),
                              [&](Vertex x) { return exhaustion.contains(n, x); });
    for (auto i = static_cast<std::size_t>(first - e.path.begin()); i < e.path.size(); ++i) {
      out.path.times.push_back(t);
      out.path.states.push_back(e.path[i]);
      t += e.holds[i];
    }
  }
  out.path.end = t;
  return out;
}

TruncationCurve truncation_curve(std::span<const std::vector<CoupledTrace>> replicas,
                                 std::span<const int> levels, int reference_level,
                                 std::size_t resamples, Rng& rng) {
  require(!replicas.empty() && !levels.empty(), ErrorCode::invalid_argument,
          "truncation curve needs replicas and levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    require(levels[i] <= reference_level && (i == 0 || levels[i] > levels[i - 1]),
            ErrorCode::invalid_argument, "levels must increase up to the reference level");
  }
  TruncationCurve c;
  c.levels.assign(levels.begin(), levels.end());
  c.reference_level = reference_level;
  for (const auto& traces : replicas) {
    require(!traces.empty(), ErrorCode::invalid_argument, "replica without traces");
    const std::uint64_t source = traces.front().source;
    const CoupledTrace* reference = nullptr;
    for (const auto& tr : traces) {
      require(tr.source == source, ErrorCode::invalid_argument,
              "uncoupled traces: a replica mixes different samples");
      if (tr.level == reference_level) reference = &tr;
    }
    require(reference != nullptr, ErrorCode::invalid_argument,
            "replica has no trace at the reference level");
    std::vector<double> row;
    for (int n : levels) {
      auto it = std::find_if(traces.begin(), traces.end(),
                             [n](const CoupledTrace& tr) { return tr.level == n; });
      require(it != traces.end(), ErrorCode::invalid_argument,
              "replica has no trace at level " + std::to_string(n));
      row.push_back(path_metric(reference->path, it->path).d);
    }
    c.d.push_back(std::move(row));
  }
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    std::vector<double> column;
    for (const auto& row : c.d) {
      column.push_back(row[j]);
      xs.push_back(levels[j]);
      ys.push_back(row[j]);
    }
    c.mean.push_back(mean(column));
    c.band.push_back(bootstrap_band(
        column.size(),
        [&](std::span<const std::size_t> idx) {
          double s = 0.0;
          for (std::size_t i : idx) s += column[i];
          return s / static_cast<double>(idx.size());
        },
        resamples, rng));
  }
  c.trend = spearman(xs, ys);
  return c;
}

TruncationCurve truncation_curve(std::span<const PointSample> samples,
                                 const Exhaustion& exhaustion, std::span<const int> levels,
                                 int reference_level, std::size_t resamples, Rng& rng,
                                 std::size_t jobs) {
  std::vector<std::vector<CoupledTrace>> replicas(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t r) {
    for (int n : levels) replicas[r].push_back(truncated_process(samples[r], exhaustion, n));
    if (std::find(levels.begin(), levels.end(), reference_level) == levels.end()) {
      replicas[r].push_back(truncated_process(samples[r], exhaustion, reference_level));
    }
  });
  return truncation_curve(replicas, levels, reference_level, resamples, rng);
}

std::string_view to_string(Trend trend) {
  switch (trend) {
    case Trend::decreasing:
      return "decreasing";
    case Trend::bounded_away:
      return "bounded_away";
    case Trend::undetermined:
      break;
  }
  return "undetermined";
}

Trend classify(std::span<const double> values, double eps, const Thresholds& th) {
  if (values.size() < 2) return Trend::undetermined;
  const double first = values.front(), last = values.back();
  if (last < th.shrink * first && last < eps) return Trend::decreasing;
  if (values.size() >= 3) {
    auto tail = values.last(3);
    double lo = *std::min_element(tail.begin(), tail.end());
    double hi = *std::max_element(tail.begin(), tail.end());
    if (lo > eps && hi - lo <= th.plateau * hi) return Trend::bounded_away;
  }
  return Trend::undetermined;
}

namespace {

Measure to_base(const Measure& m, std::span<const Vertex> map) {
  Measure out;
  for (std::size_t i = 0; i < m.support.size(); ++i) {
    out.support.push_back(map[m.support[i]]);
    out.mass.push_back(m.mass[i]);
  }
  return out;
}

struct LevelValues {
  double entry_tv = 0.0;
  double resistance_gap = 0.0;
  double forest_gap = 0.0;
};

LevelValues level_values(const WeightedGraph& g, const Exhaustion& ex, std::span<const Vertex> K,
                         std::span<const VertexPair> panel, int n, const SolverOptions& solver) {
  LevelValues v;
  auto q = wire(g, ex, n);
  auto fw = free_window(g, ex, n);
  std::vector<Vertex> kq, kf;
  for (Vertex k : K) {
    kq.push_back(q.from_base[k]);
    kf.push_back(fw.from_base[k]);
  }
  auto wired = to_base(equilibrium_measure(q, kq, solver).normalized, q.to_base);
  auto fields = harmonic_measure_fields(fw.graph, kf, solver);
  for (Vertex probe : ex.shell_members(n)) {
    if (std::find(K.begin(), K.end(), probe) != K.end()) continue;
    auto free = to_base(fields.at(fw.from_base[probe]), fw.to_base).normalized();
    v.entry_tv = std::max(v.entry_tv, tv_distance(wired, free));
  }
  double r_free = effective_resistance(fw.graph, kf[0], kf[1], solver);
  double r_wired = effective_resistance(q.graph, kq[0], kq[1], solver);
  v.resistance_gap = (r_free - r_wired) / r_free;
  auto mf = panel_marginals(g, ex, n, panel, BoundaryKind::free, solver);
  auto mw = panel_marginals(g, ex, n, panel, BoundaryKind::wired, solver);
  for (std::size_t i = 0; i < panel.size(); ++i) {
    v.forest_gap = std::max(v.forest_gap, std::abs(mf.probability[i] - mw.probability[i]));
  }
  return v;
}

LevelDiagnostic make_diagnostic(std::string name, std::vector<int> levels,
                                std::vector<double> values, double eps, const Thresholds& th) {
  LevelDiagnostic d;
  d.name = std::move(name);
  d.levels = std::move(levels);
  d.values = std::move(values);
  d.threshold = eps;
  d.trend = classify(d.values, eps, th);
  d.limit = extrapolate_limit(d.values);
  return d;
}

std::vector<Vertex> first_K_hits(const Trajectory& t, std::span<const Vertex> K) {
  std::vector<Vertex> hits;
  bool looking = false;
  bool first_excursion = true;
  for (Vertex x : t.steps) {
    if (x == kInf) {
      looking = !first_excursion || t.start == StartMode::from_vertex;
      first_excursion = false;
      continue;
    }
    if (looking && std::find(K.begin(), K.end(), x) != K.end()) {
      hits.push_back(x);
      looking = false;
    }
  }
  return hits;
}

}  // namespace

EquivalenceReport equivalence_report(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                     std::span<const Vertex> K, const Budgets& budgets,
                                     const Thresholds& thresholds,
                                     const std::string& graph_label) {
  EquivalenceReport r;
  r.graph = graph_label;
  r.K.assign(K.begin(), K.end());
  for (Vertex k : K) r.K_names.push_back(graph.name(k));
  r.budgets = budgets;
  if (r.budgets.last_level < 0) r.budgets.last_level = std::min(12, exhaustion.window() - 1);
  r.thresholds = thresholds;
  const Budgets& b = r.budgets;

  require(K.size() >= 2, ErrorCode::invalid_argument,
          "K needs at least two vertices for the resistance diagnostic");
  require(b.first_level >= 1 && b.first_level + 2 <= b.last_level &&
              b.last_level < exhaustion.window(),
          ErrorCode::invalid_argument,
          "levels must satisfy 1 <= first < first + 2 <= last < window");
  for (Vertex k : K) {
    require(exhaustion.shell(k) < b.first_level && exhaustion.shell(k) <= b.entry_level,
            ErrorCode::invalid_argument,
            "K must lie inside VG_" + std::to_string(std::min(b.first_level - 1, b.entry_level)));
  }

  std::vector<VertexPair> panel;
  for (auto e : central_panel(graph, exhaustion, b.panel)) {
    if (exhaustion.contains(b.first_level, e.first) && exhaustion.contains(b.first_level, e.second)) {
      panel.push_back(e);
    }
  }
  require(!panel.empty(), ErrorCode::invalid_argument, "edge panel is empty");

  std::vector<int> levels;
  for (int n = b.first_level; n <= b.last_level; ++n) levels.push_back(n);
  std::vector<std::optional<LevelValues>> values(levels.size());
  std::vector<std::string> failures(levels.size());
  parallel_for(levels.size(), b.jobs, [&](std::size_t i) {
    try {
      values[i] = level_values(graph, exhaustion, K, panel, levels[i], b.solver);
    } catch (const Error& e) {
      failures[i] = "level " + std::to_string(levels[i]) + ": " + e.what();
    }
  });
  std::vector<int> done;
  std::vector<double> tv, gap, forest;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!values[i]) {
      r.partial = true;
      r.notes.push_back(failures[i]);
      continue;
    }
    done.push_back(levels[i]);
    tv.push_back(values[i]->entry_tv);
    gap.push_back(values[i]->resistance_gap);
    forest.push_back(values[i]->forest_gap);
  }
  r.entry_tv = make_diagnostic("entry_tv", done, tv, thresholds.tv, thresholds);
  r.resistance_gap = make_diagnostic("resistance_gap", done, gap, thresholds.resistance, thresholds);
  r.forest_gap = make_diagnostic("forest_gap", done, forest, thresholds.forest, thresholds);

  // sampled entries: interlacement roots vs first K-hits of free-trace excursions
  r.sampled_entry.level = b.entry_level;
  try {
    InterlacementSampler ri(graph, exhaustion, r.K, b.solver);
    ReflectedSampler reflected(graph, exhaustion, b.entry_level, EntryMode::free_trace, b.solver);
    auto rates = default_rate(exhaustion, b.rate_base, b.rate_growth);
    std::vector<Vertex> roots, hits;
    parallel_for(2, b.jobs, [&](std::size_t which) {
      auto streams = SamplerStreams::from_seed(b.seed, which);
      if (which == 0) {
        InterlacementOptions opts;
        opts.legs = false;
        auto s = ri.sample(static_cast<double>(b.entry_samples) / ri.capacity(), rates, streams, opts);
        for (const auto& e : s.excursions) roots.push_back(e.root_vertex());
      } else {
        ReflectedOptions opts;
        opts.max_excursions = b.entry_samples + 1;
        opts.with_holds = false;
        opts.max_steps = b.max_steps;
        hits = first_K_hits(reflected.sample(rates, streams, opts), r.K);
      }
    });
    r.sampled_entry.ri_roots = roots.size();
    r.sampled_entry.reflected_hits = hits.size();
    require(!roots.empty() && !hits.empty(), ErrorCode::budget_exceeded,
            "no entries sampled within the budget");
    auto boot = Rng::substream(b.seed, 2);
    r.sampled_entry.tv = empirical_tv(roots, hits, b.bootstrap, boot);
    r.sampled_entry.tv.level = b.entry_level;
    if (r.sampled_entry.tv.tv <= thresholds.entry_tv) {
      r.sampled_entry.outcome = "agrees";
    } else if (r.sampled_entry.tv.band.lo > thresholds.entry_tv) {
      r.sampled_entry.outcome = "disagrees";
    }
  } catch (const Error& e) {
    r.partial = true;
    r.notes.push_back(std::string("sampled entries: ") + e.what());
  }

  const LevelDiagnostic* exact[] = {&r.entry_tv, &r.resistance_gap, &r.forest_gap};
  bool any_away = r.sampled_entry.outcome == "disagrees";
  bool all_down = r.sampled_entry.outcome == "agrees";
  for (const auto* d : exact) {
    any_away = any_away || d->trend == Trend::bounded_away;
    all_down = all_down && d->trend == Trend::decreasing;
  }
  if (r.partial) {
    r.verdict = "inconclusive";
  } else if (any_away) {
    r.verdict = "inconsistent";
  } else if (all_down) {
    r.verdict = "consistent";
  } else {
    r.verdict = "inconclusive";
  }
  return r;
}

std::string EquivalenceReport::appendix_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "level,diagnostic,value\n";
  for (const auto* d : {&entry_tv, &resistance_gap, &forest_gap}) {
    for (std::size_t i = 0; i < d->levels.size(); ++i) {
      out << d->levels[i] << ',' << d->name << ',' << d->values[i] << '\n';
    }
  }
  out << sampled_entry.level << ",sampled_entry_tv," << sampled_entry.tv.tv << '\n';
  return out.str();
}

nlohmann::ordered_json EquivalenceReport::to_json() const {
  using json = nlohmann::ordered_json;
  auto diag = [](const LevelDiagnostic& d) {
    return json{{"name", d.name},
                {"levels", d.levels},
                {"values", d.values},
                {"threshold", d.threshold},
                {"trend", std::string(to_string(d.trend))},
                {"limit_estimate", d.limit.value},
                {"limit_extrapolated", d.limit.extrapolated}};
  };
  json j;
  j["graph"] = graph;
  j["K"] = K_names;
  j["budgets"] = {{"first_level", budgets.first_level},
                  {"last_level", budgets.last_level},
                  {"panel", budgets.panel},
                  {"entry_level", budgets.entry_level},
                  {"entry_samples", budgets.entry_samples},
                  {"rate_base", budgets.rate_base},
                  {"rate_growth", budgets.rate_growth},
                  {"seed", budgets.seed},
                  {"solver_tol", budgets.solver.tol},
                  {"bootstrap", budgets.bootstrap},
                  {"max_steps", budgets.max_steps}};
  j["thresholds"] = {{"tv", thresholds.tv},
                     {"resistance", thresholds.resistance},
                     {"forest", thresholds.forest},
                     {"shrink", thresholds.shrink},
                     {"plateau", thresholds.plateau},
                     {"entry_tv", thresholds.entry_tv}};
  j["diagnostics"] = json::array({diag(entry_tv), diag(resistance_gap), diag(forest_gap)});
  j["sampled_entry"] = {{"level", sampled_entry.level},
                        {"tv", sampled_entry.tv.tv},
                        {"band", {sampled_entry.tv.band.lo, sampled_entry.tv.band.hi}},
                        {"ri_roots", sampled_entry.ri_roots},
                        {"reflected_hits", sampled_entry.reflected_hits},
                        {"outcome", sampled_entry.outcome}};
  j["verdict"] = verdict;
  j["partial"] = partial;
  j["notes"] = notes;
  j["appendix_csv"] = appendix_csv();
  return j;
}

}  // namespace interlab
