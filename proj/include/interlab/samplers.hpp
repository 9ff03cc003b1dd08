#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "interlab/error.hpp"
#include "interlab/graph.hpp"
#include "interlab/potential.hpp"

namespace interlab {

/// Marker separating excursions inside a trajectory.
inline constexpr Vertex kInf = -1;

/// mt19937_64 with helpers for the draws the samplers need. Substreams are
/// seeded from (seed, stream id) through splitmix64 so that independent
/// consumers never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);
  static Rng substream(std::uint64_t seed, std::uint64_t stream);

  double uniform();
  double exponential();
  std::uint64_t poisson(double mean);
  std::size_t below(std::size_t n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Topology decisions (steps, entry points, counts, labels) and holding times
/// come from separate streams, so changing the rates never changes a skeleton.
struct SamplerStreams {
  Rng topology;
  Rng holds;

  static SamplerStreams from_seed(std::uint64_t seed, std::uint64_t replica = 0);
};

/// Sampling from a fixed finite distribution by inversion of the cumulative
/// sums.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> weights);
  std::size_t operator()(Rng& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

/// Exponential holding rates m(x) per vertex.
struct RateSchedule {
  std::vector<double> rate;
  double base = 1.0;
  double growth = 1.0;

  double at(Vertex x) const { return rate[x]; }
};

/// m(x) = base * growth^shell(x).
RateSchedule default_rate(const Exhaustion& exhaustion, double base, double growth);

enum class StartMode { from_vertex, from_infinity };

/// Vertex path, kInf marking the point at infinity between excursions.
/// holds is either empty or parallel to steps (0 at kInf markers).
struct Trajectory {
  std::vector<Vertex> steps;
  std::vector<double> holds;
  StartMode start = StartMode::from_vertex;

  double duration() const;
  std::size_t excursions() const;
};

/// Checks adjacency of consecutive vertices and positivity of holds; returns
/// an empty string when valid.
std::string validate(const WeightedGraph& graph, const Trajectory& trajectory);

/// Raised when a walk runs out of its step budget; carries the trace so far.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, Trajectory partial)
      : Error(ErrorCode::budget_exceeded, what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

using StopRule = std::function<bool(Vertex)>;

inline constexpr std::size_t kDefaultStepBudget = 50'000'000;

/// Walk with kernel p(x, y) = c(x, y) / π(x) from start until stop holds
/// (checked at the start vertex too).
Trajectory walk(const WeightedGraph& graph, Vertex start, const StopRule& stop, Rng& rng,
                std::size_t max_steps = kDefaultStepBudget);

/// One step of the walk.
Vertex step(const WeightedGraph& graph, Vertex x, Rng& rng);

/// Fills in holds Exp(1) / m(x) for every non-marker step.
void attach_holds(Trajectory& trajectory, const RateSchedule& rates, Rng& rng);

/// Escape function h(x) = P_x[walk hits the rim before K] on the window,
/// computed from the wired voltage of K on the quotient that collapses the
/// outermost shell.
struct NoReturnField {
  std::vector<Vertex> K;
  std::vector<char> in_K;
  std::vector<double> h;
};

NoReturnField no_return_field(const WeightedGraph& graph, const Exhaustion& exhaustion,
                              std::span<const Vertex> K, const SolverOptions& options = {});

/// Walk from y in K conditioned never to return to K, as the h-transform with
/// the escape function; runs until it reaches the rim (included).
Trajectory walk_conditioned_no_return(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                      const NoReturnField& field, Vertex y, Rng& rng,
                                      std::size_t max_steps = kDefaultStepBudget);

/// The same law by rejection: unconditioned walks from y, discarded when
/// they come back to K before the rim.
struct RejectionResult {
  Trajectory trajectory;
  std::size_t attempts = 0;
};

RejectionResult walk_no_return_by_rejection(const WeightedGraph& graph,
                                            const Exhaustion& exhaustion,
                                            const NoReturnField& field, Vertex y, Rng& rng,
                                            std::size_t max_attempts = 1'000'000);

/// One interlacement trajectory through K: the backward leg reversed, then
/// the forward leg; path[root] is the first visit to K.
struct Excursion {
  std::vector<Vertex> path;
  std::vector<double> holds;
  std::size_t root = 0;
  double label = 0.0;

  Vertex root_vertex() const { return path[root]; }
};

struct PointSample {
  std::vector<Excursion> excursions;
  std::vector<Vertex> K;
  /// Level m when K = VG_m, otherwise -1.
  int defining_level = -1;
  /// Level of the quotient whose z plays the point at infinity.
  int window_level = 0;
  double u_max = 0.0;
  double capacity = 0.0;
};

struct InterlacementOptions {
  /// Draw only counts, labels and roots.
  bool legs = true;
  /// Use the rejection sampler for the backward legs.
  bool rejection_backward = false;
  std::size_t max_steps = kDefaultStepBudget;
};

/// Precomputes cap(K), ẽ_K and the escape function for a defining set K.
class InterlacementSampler {
 public:
  InterlacementSampler(const WeightedGraph& graph, const Exhaustion& exhaustion,
                       std::vector<Vertex> K, const SolverOptions& options = {});

  PointSample sample(double u_max, const RateSchedule& rates, SamplerStreams& streams,
                     const InterlacementOptions& options = {}) const;

  double capacity() const { return capacity_; }
  /// ẽ_K in the order of K().
  const std::vector<double>& normalized_equilibrium() const { return normalized_; }
  const std::vector<Vertex>& K() const { return field_.K; }
  const NoReturnField& no_return() const { return field_; }

 private:
  const WeightedGraph* graph_;
  const Exhaustion* exhaustion_;
  NoReturnField field_;
  double capacity_ = 0.0;
  std::vector<double> normalized_;
  DiscreteSampler roots_;
  int defining_level_ = -1;
};

struct Visit {
  std::size_t excursion = 0;
  /// Step index relative to the root; negative on the backward leg.
  long step = 0;
  Vertex vertex = 0;
  double hold = 0.0;
  /// Sum of the holds of all earlier visits.
  double time = 0.0;
};

/// Visits sorted by (label, excursion index, step).
std::vector<Visit> interlacement_order(const PointSample& sample);

enum class EntryMode { wired, free_trace };

std::string_view to_string(EntryMode mode);
EntryMode parse_entry_mode(std::string_view text);

struct ReflectedOptions {
  EntryMode mode = EntryMode::wired;
  double duration = std::numeric_limits<double>::infinity();
  std::size_t max_excursions = std::numeric_limits<std::size_t>::max();
  /// Stop once every listed vertex has been visited after the first marker.
  std::vector<Vertex> cover;
  /// Start with a walk from this vertex instead of an entry from infinity.
  std::optional<Vertex> start;
  bool with_holds = true;
  std::size_t max_steps = kDefaultStepBudget;
};

/// Truncated reflected walk on VG_n: excursions enter VG_n from infinity,
/// walk until they reach the rim, and re-enter. Entry laws are precomputed:
/// wired mode uses ẽ_{VG_n}; free-trace mode uses y -> h^y_{VG_n}(exit
/// vertex) with free boundary on the whole window. The first entry after a
/// start from infinity uses ẽ_{VG_n} in both modes.
class ReflectedSampler {
 public:
  ReflectedSampler(const WeightedGraph& graph, const Exhaustion& exhaustion, int n,
                   EntryMode mode, const SolverOptions& options = {});

  Trajectory sample(const RateSchedule& rates, SamplerStreams& streams,
                    const ReflectedOptions& options) const;

  int level() const { return n_; }
  EntryMode mode() const { return mode_; }
  /// Entry law after an exit at rim vertex x (ẽ_{VG_n} in wired mode),
  /// supported on entry_support().
  std::vector<double> entry_law(Vertex exit) const;
  const std::vector<Vertex>& entry_support() const { return support_; }
  const std::vector<double>& wired_law() const { return wired_; }

 private:
  Vertex draw_entry(std::optional<Vertex> exit, Rng& rng) const;

  const WeightedGraph* graph_;
  const Exhaustion* exhaustion_;
  int n_;
  EntryMode mode_;
  std::vector<Vertex> support_;
  std::vector<double> wired_;
  DiscreteSampler wired_sampler_;
  std::vector<int> rim_slot_;
  std::vector<DiscreteSampler> free_samplers_;
  std::vector<std::vector<double>> free_laws_;
};

/// Value of a field at the rim vertex where walks from start are killed.
struct MartingaleEstimate {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t walks = 0;
};

MartingaleEstimate martingale_limit(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                    std::span<const double> field, Vertex start,
                                    std::size_t walks, Rng& rng);

}  // namespace interlab
