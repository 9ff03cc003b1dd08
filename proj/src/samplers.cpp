#include "interlab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dirichlet.hpp"

namespace interlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::substream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::exponential() { return -std::log1p(-uniform()); }

std::uint64_t Rng::poisson(double mean) {
  require(mean >= 0.0 && std::isfinite(mean), ErrorCode::invalid_argument,
          "Poisson mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

std::size_t Rng::below(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

SamplerStreams SamplerStreams::from_seed(std::uint64_t seed, std::uint64_t replica) {
  return SamplerStreams{Rng::substream(seed, 2 * replica), Rng::substream(seed, 2 * replica + 1)};
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
  require(!weights.empty(), ErrorCode::invalid_argument, "empty distribution");
  cumulative_.reserve(weights.size());
  double acc = 0.0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), ErrorCode::invalid_argument, "negative weight");
    acc += w;
    cumulative_.push_back(acc);
  }
  require(acc > 0.0, ErrorCode::invalid_argument, "distribution has zero mass");
}

std::size_t DiscreteSampler::operator()(Rng& rng) const {
  double target = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

RateSchedule default_rate(const Exhaustion& exhaustion, double base, double growth) {
  require(base > 0.0, ErrorCode::invalid_argument, "rate base must be positive");
  require(growth >= 1.0, ErrorCode::invalid_argument, "rate growth must be at least 1");
  RateSchedule r;
  r.base = base;
  r.growth = growth;
  r.rate.reserve(exhaustion.shells().size());
  for (int s : exhaustion.shells()) r.rate.push_back(base * std::pow(growth, s));
  return r;
}

double Trajectory::duration() const { return std::accumulate(holds.begin(), holds.end(), 0.0); }

std::size_t Trajectory::excursions() const {
  auto markers = static_cast<std::size_t>(std::count(steps.begin(), steps.end(), kInf));
  if (start == StartMode::from_infinity && markers > 0) --markers;
  return markers;
}

std::string validate(const WeightedGraph& graph, const Trajectory& t) {
  if (!t.holds.empty() && t.holds.size() != t.steps.size()) return "holds and steps differ in length";
  const auto n = static_cast<Vertex>(graph.num_vertices());
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    Vertex x = t.steps[i];
    if (x != kInf && (x < 0 || x >= n)) return "step " + std::to_string(i) + " out of range";
    if (!t.holds.empty()) {
      if (x == kInf && t.holds[i] != 0.0) return "marker with a holding time";
      if (x != kInf && !(t.holds[i] > 0.0)) return "nonpositive hold at step " + std::to_string(i);
    }
    if (i > 0 && x != kInf && t.steps[i - 1] != kInf && graph.conductance(t.steps[i - 1], x) <= 0.0) {
      return "steps " + std::to_string(i - 1) + " and " + std::to_string(i) + " are not adjacent";
    }
  }
  return {};
}

Vertex step(const WeightedGraph& graph, Vertex x, Rng& rng) {
  auto nbrs = graph.neighbors(x);
  auto cs = graph.conductances(x);
  double target = rng.uniform() * graph.pi(x);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < nbrs.size(); ++k) {
    acc += cs[k];
    if (target < acc) return nbrs[k];
  }
  return nbrs.back();
}

Trajectory walk(const WeightedGraph& graph, Vertex start, const StopRule& stop, Rng& rng,
                std::size_t max_steps) {
  require(start >= 0 && static_cast<std::size_t>(start) < graph.num_vertices(),
          ErrorCode::invalid_argument, "walk start outside the window");
  Trajectory t;
  Vertex x = start;
  t.steps.push_back(x);
  while (!stop(x)) {
    if (t.steps.size() > max_steps) {
      throw BudgetExceeded("walk exceeded " + std::to_string(max_steps) + " steps", std::move(t));
    }
    x = step(graph, x, rng);
    t.steps.push_back(x);
  }
  return t;
}

void attach_holds(Trajectory& t, const RateSchedule& rates, Rng& rng) {
  t.holds.assign(t.steps.size(), 0.0);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    if (t.steps[i] != kInf) t.holds[i] = rng.exponential() / rates.at(t.steps[i]);
  }
}

namespace {

bool on_rim(const Exhaustion& ex, Vertex x) { return ex.shell(x) == ex.window(); }

void require_inside(const Exhaustion& ex, std::span<const Vertex> K) {
  require(!K.empty(), ErrorCode::invalid_argument, "K is empty");
  require(ex.window() >= 1, ErrorCode::invalid_argument, "window has no rim");
  for (Vertex k : K) {
    require(ex.shell(k) < ex.window(), ErrorCode::invalid_argument,
            "K touches the rim; enlarge the window");
  }
}

std::optional<int> defining_level(const Exhaustion& ex, std::vector<Vertex> K) {
  std::sort(K.begin(), K.end());
  for (int m = 0; m < ex.window(); ++m) {
    auto level = ex.level(m);
    if (level.size() == K.size() && std::equal(level.begin(), level.end(), K.begin())) return m;
  }
  return std::nullopt;
}

}  // namespace

NoReturnField no_return_field(const WeightedGraph& graph, const Exhaustion& exhaustion,
                              std::span<const Vertex> K, const SolverOptions& options) {
  require_inside(exhaustion, K);
  auto q = wire(graph, exhaustion, exhaustion.window() - 1);
  std::vector<Vertex> local;
  for (Vertex k : K) local.push_back(q.from_base[k]);
  std::vector<double> ones(local.size(), 1.0);
  auto phi = solve_harmonic(q, local, ones, options);
  NoReturnField f;
  f.K.assign(K.begin(), K.end());
  f.in_K.assign(graph.num_vertices(), 0);
  for (Vertex k : K) f.in_K[k] = 1;
  f.h.assign(graph.num_vertices(), 1.0);
  for (Vertex x = 0; x < static_cast<Vertex>(graph.num_vertices()); ++x) {
    if (f.in_K[x]) {
      f.h[x] = 0.0;
    } else if (!on_rim(exhaustion, x)) {
      f.h[x] = std::clamp(1.0 - phi.values[q.from_base[x]], 0.0, 1.0);
    }
  }
  return f;
}

Trajectory walk_conditioned_no_return(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                      const NoReturnField& field, Vertex y, Rng& rng,
                                      std::size_t max_steps) {
  require(field.in_K[y], ErrorCode::invalid_argument, "conditioned walk must start in K");
  Trajectory t;
  Vertex x = y;
  t.steps.push_back(x);
  while (!on_rim(exhaustion, x)) {
    if (t.steps.size() > max_steps) {
      throw BudgetExceeded("conditioned walk exceeded " + std::to_string(max_steps) + " steps",
                           std::move(t));
    }
    auto nbrs = graph.neighbors(x);
    auto cs = graph.conductances(x);
    double total = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) total += cs[k] * field.h[nbrs[k]];
    require(total > 0.0, ErrorCode::singular,
            "escape probability vanishes at '" + graph.name(x) + "'; window too small");
    double target = rng.uniform() * total;
    double acc = 0.0;
    Vertex next = kInf;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      double w = cs[k] * field.h[nbrs[k]];
      if (w <= 0.0) continue;
      next = nbrs[k];
      acc += w;
      if (target < acc) break;
    }
    x = next;
    t.steps.push_back(x);
  }
  return t;
}

RejectionResult walk_no_return_by_rejection(const WeightedGraph& graph,
                                            const Exhaustion& exhaustion,
                                            const NoReturnField& field, Vertex y, Rng& rng,
                                            std::size_t max_attempts) {
  require(field.in_K[y], ErrorCode::invalid_argument, "conditioned walk must start in K");
  RejectionResult out;
  while (out.attempts < max_attempts) {
    ++out.attempts;
    Trajectory t;
    t.steps.push_back(y);
    Vertex x = step(graph, y, rng);
    t.steps.push_back(x);
    while (!field.in_K[x] && !on_rim(exhaustion, x)) {
      x = step(graph, x, rng);
      t.steps.push_back(x);
    }
    if (!field.in_K[x]) {
      out.trajectory = std::move(t);
      return out;
    }
  }
  throw BudgetExceeded("rejection sampler exceeded " + std::to_string(max_attempts) + " attempts",
                       Trajectory{});
}

InterlacementSampler::InterlacementSampler(const WeightedGraph& graph,
                                           const Exhaustion& exhaustion, std::vector<Vertex> K,
                                           const SolverOptions& options)
    : graph_(&graph), exhaustion_(&exhaustion) {
  require_inside(exhaustion, K);
  auto q = wire(graph, exhaustion, exhaustion.window() - 1);
  std::vector<Vertex> local;
  for (Vertex k : K) local.push_back(q.from_base[k]);
  auto eq = equilibrium_measure(q, local, options);
  capacity_ = eq.capacity;
  normalized_ = eq.normalized.mass;
  roots_ = DiscreteSampler(normalized_);
  field_ = no_return_field(graph, exhaustion, K, options);
  defining_level_ = defining_level(exhaustion, K).value_or(-1);
}

PointSample InterlacementSampler::sample(double u_max, const RateSchedule& rates,
                                         SamplerStreams& streams,
                                         const InterlacementOptions& options) const {
  require(u_max >= 0.0 && std::isfinite(u_max), ErrorCode::invalid_argument,
          "u_max must be finite and nonnegative");
  PointSample s;
  s.K = field_.K;
  s.defining_level = defining_level_;
  s.window_level = exhaustion_->window() - 1;
  s.u_max = u_max;
  s.capacity = capacity_;
  const auto count = streams.topology.poisson(u_max * capacity_);
  s.excursions.reserve(count);
  const WeightedGraph& g = *graph_;
  const Exhaustion& ex = *exhaustion_;
  auto rim = [&ex](Vertex x) { return on_rim(ex, x); };
  for (std::uint64_t i = 0; i < count; ++i) {
    Excursion e;
    e.label = u_max * streams.topology.uniform();
    Vertex y = field_.K[roots_(streams.topology)];
    if (!options.legs) {
      e.path = {y};
      e.holds = {streams.holds.exponential() / rates.at(y)};
      s.excursions.push_back(std::move(e));
      continue;
    }
    auto forward = walk(g, y, rim, streams.topology, options.max_steps);
    auto backward =
        options.rejection_backward
            ? walk_no_return_by_rejection(g, ex, field_, y, streams.topology).trajectory
            : walk_conditioned_no_return(g, ex, field_, y, streams.topology, options.max_steps);
    e.path.assign(backward.steps.rbegin(), backward.steps.rend() - 1);
    e.root = e.path.size();
    e.path.insert(e.path.end(), forward.steps.begin(), forward.steps.end());
    e.holds.reserve(e.path.size());
    for (Vertex x : e.path) e.holds.push_back(streams.holds.exponential() / rates.at(x));
    s.excursions.push_back(std::move(e));
  }
  return s;
}

std::vector<Visit> interlacement_order(const PointSample& sample) {
  std::vector<std::size_t> order(sample.excursions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample.excursions[a].label < sample.excursions[b].label;
  });
  std::vector<Visit> visits;
  double time = 0.0;
  for (std::size_t m : order) {
    const auto& e = sample.excursions[m];
    for (std::size_t i = 0; i < e.path.size(); ++i) {
      Visit v;
      v.excursion = m;
      v.step = static_cast<long>(i) - static_cast<long>(e.root);
      v.vertex = e.path[i];
      v.hold = e.holds[i];
      v.time = time;
      time += v.hold;
      visits.push_back(v);
    }
  }
  return visits;
}

std::string_view to_string(EntryMode mode) {
  return mode == EntryMode::wired ? "wired" : "free-trace";
}

EntryMode parse_entry_mode(std::string_view text) {
  if (text == "wired") return EntryMode::wired;
  if (text == "free-trace" || text == "free_trace") return EntryMode::free_trace;
  fail(ErrorCode::invalid_argument, "entry mode must be wired or free-trace, got '" +
                                        std::string(text) + "'");
}

ReflectedSampler::ReflectedSampler(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                   int n, EntryMode mode, const SolverOptions& options)
    : graph_(&graph), exhaustion_(&exhaustion), n_(n), mode_(mode) {
  require(n >= 0 && n < exhaustion.window(), ErrorCode::invalid_argument,
          "reflection level must lie strictly inside the window");
  support_ = exhaustion.boundary(graph, n);
  const int top = exhaustion.window() - 1;
  auto q = wire(graph, exhaustion, top);
  std::vector<Vertex> local;
  for (Vertex x : exhaustion.level(n)) local.push_back(q.from_base[x]);
  auto eq = equilibrium_measure(q, local, options);
  for (Vertex y : support_) wired_.push_back(eq.normalized.at(q.from_base[y]));
  wired_sampler_ = DiscreteSampler(wired_);

  if (mode == EntryMode::free_trace) {
    auto level = exhaustion.level(n);
    detail::DirichletSolver solver(graph, level, options);
    auto rim = exhaustion.rim();
    rim_slot_.assign(graph.num_vertices(), -1);
    for (std::size_t i = 0; i < rim.size(); ++i) rim_slot_[rim[i]] = static_cast<int>(i);
    free_laws_.assign(rim.size(), std::vector<double>(support_.size(), 0.0));
    std::vector<double> boundary(graph.num_vertices(), 0.0);
    for (std::size_t j = 0; j < support_.size(); ++j) {
      boundary[support_[j]] = 1.0;
      auto h = solver.solve(boundary);
      boundary[support_[j]] = 0.0;
      for (std::size_t i = 0; i < rim.size(); ++i) free_laws_[i][j] = std::max(h[rim[i]], 0.0);
    }
    for (auto& law : free_laws_) {
      double total = std::accumulate(law.begin(), law.end(), 0.0);
      for (double& p : law) p /= total;
      free_samplers_.emplace_back(law);
    }
  }
}

std::vector<double> ReflectedSampler::entry_law(Vertex exit) const {
  if (mode_ == EntryMode::wired) return wired_;
  require(rim_slot_[exit] >= 0, ErrorCode::invalid_argument, "exit vertex is not on the rim");
  return free_laws_[rim_slot_[exit]];
}

Vertex ReflectedSampler::draw_entry(std::optional<Vertex> exit, Rng& rng) const {
  if (mode_ == EntryMode::wired || !exit) return support_[wired_sampler_(rng)];
  return support_[free_samplers_[rim_slot_[*exit]](rng)];
}

Trajectory ReflectedSampler::sample(const RateSchedule& rates, SamplerStreams& streams,
                                    const ReflectedOptions& options) const {
  const WeightedGraph& g = *graph_;
  const Exhaustion& ex = *exhaustion_;
  Trajectory t;
  t.start = options.start ? StartMode::from_vertex : StartMode::from_infinity;
  bool counting = false;
  std::vector<char> pending(g.num_vertices(), 0);
  std::size_t remaining = 0;
  for (Vertex c : options.cover) {
    if (!pending[c]) {
      pending[c] = 1;
      ++remaining;
    }
  }
  const bool cover = remaining > 0;
  double time = 0.0;
  std::size_t done = 0;
  auto push_marker = [&] {
    t.steps.push_back(kInf);
    if (options.with_holds) t.holds.push_back(0.0);
    counting = true;
  };

  Vertex x;
  if (options.start) {
    x = *options.start;
  } else {
    push_marker();
    x = draw_entry(std::nullopt, streams.topology);
  }
  while (true) {
    // one excursion: x is already chosen
    while (true) {
      t.steps.push_back(x);
      if (options.with_holds) {
        double hold = streams.holds.exponential() / rates.at(x);
        hold = std::min(hold, options.duration - time);
        t.holds.push_back(hold);
        time += hold;
      }
      if (counting && pending[x]) {
        pending[x] = 0;
        --remaining;
      }
      if (time >= options.duration) return t;
      if (cover && remaining == 0) return t;
      if (on_rim(ex, x)) break;
      if (t.steps.size() > options.max_steps) {
        throw BudgetExceeded("reflected walk exceeded " + std::to_string(options.max_steps) +
                                 " steps",
                             std::move(t));
      }
      x = step(g, x, streams.topology);
    }
    push_marker();
    if (++done >= options.max_excursions) return t;
    x = draw_entry(x, streams.topology);
  }
}

MartingaleEstimate martingale_limit(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                    std::span<const double> field, Vertex start,
                                    std::size_t walks, Rng& rng) {
  require(walks > 0, ErrorCode::invalid_argument, "need at least one walk");
  MartingaleEstimate out;
  out.walks = walks;
  double sum = 0.0, sum2 = 0.0;
  out.min = std::numeric_limits<double>::infinity();
  out.max = -out.min;
  for (std::size_t i = 0; i < walks; ++i) {
    auto t = walk(graph, start, [&](Vertex x) { return on_rim(exhaustion, x); }, rng);
    double v = field[t.steps.back()];
    sum += v;
    sum2 += v * v;
    out.min = std::min(out.min, v);
    out.max = std::max(out.max, v);
  }
  out.mean = sum / static_cast<double>(walks);
  double var = sum2 / static_cast<double>(walks) - out.mean * out.mean;
  out.stddev = std::sqrt(std::max(var, 0.0));
  return out;
}

}  // namespace interlab
