#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "interlab/graph.hpp"
#include "interlab/potential.hpp"
#include "interlab/samplers.hpp"
#include "interlab/stats.hpp"

namespace interlab {

/// ½ Σ |a - b| over the union of supports. Both measures must have total
/// mass 1 within 1e-9.
double tv_distance(const Measure& a, const Measure& b);

/// Normalized histogram of samples.
Measure empirical_measure(std::span<const Vertex> samples);

struct TVReport {
  int level = -1;
  Measure a;
  Measure b;
  double tv = 0.0;
  std::size_t size_a = 0;
  /// 0 when b is exact.
  std::size_t size_b = 0;
  Band band;
};

/// Plug-in TV of an empirical law against an exact one, with a percentile
/// bootstrap band over resamples of the data.
TVReport empirical_tv(std::span<const Vertex> samples, const Measure& exact, std::size_t resamples,
                      Rng& rng);
/// Two empirical laws; both samples are resampled independently.
TVReport empirical_tv(std::span<const Vertex> a, std::span<const Vertex> b, std::size_t resamples,
                      Rng& rng);

inline constexpr Vertex kCemetery = -3;

/// Piecewise-constant path: states[i] holds on [times[i], times[i+1]) and the
/// last state until end; after end the path sits in kCemetery.
struct TimedPath {
  std::vector<double> times;
  std::vector<Vertex> states;
  double end = 0.0;

  Vertex at(double t) const;
};

/// Visits with positive hold, markers skipped; requires holds.
TimedPath timed_path(const Trajectory& trajectory);

struct PathMetricValue {
  double d = 0.0;
  double horizon = std::numeric_limits<double>::infinity();
  /// e^{-horizon}: the most the part beyond the horizon can add.
  double tail_bound = 0.0;
};

/// ∫_0^horizon e^{-t} 1{f(t) != g(t)} dt, exactly on the merged breakpoints.
PathMetricValue path_metric(const TimedPath& f, const TimedPath& g,
                            double horizon = std::numeric_limits<double>::infinity());

/// Identifies the point sample a truncated path was cut from.
std::uint64_t fingerprint(const PointSample& sample);

struct CoupledTrace {
  std::uint64_t source = 0;
  int level = 0;
  TimedPath path;
};

/// The process Z^n of a sample: in interlacement order, every excursion that
/// meets VG_n contributes its visits from its first visit to VG_n on; the
/// others are dropped. At n = window the sample is kept whole.
CoupledTrace truncated_process(const PointSample& sample, const Exhaustion& exhaustion, int n);

struct TruncationCurve {
  std::vector<int> levels;
  int reference_level = 0;
  /// Per replica, per level.
  std::vector<std::vector<double>> d;
  std::vector<double> mean;
  std::vector<Band> band;
  Correlation trend;
};

/// Mean d(Z^N, Z^n) per level. Each replica lists its traces; the one at
/// reference_level is Z^N. Traces within a replica must come from the same
/// sample.
TruncationCurve truncation_curve(std::span<const std::vector<CoupledTrace>> replicas,
                                 std::span<const int> levels, int reference_level,
                                 std::size_t resamples, Rng& rng);

/// Convenience: truncates each sample at every level and at reference_level.
TruncationCurve truncation_curve(std::span<const PointSample> samples,
                                 const Exhaustion& exhaustion, std::span<const int> levels,
                                 int reference_level, std::size_t resamples, Rng& rng,
                                 std::size_t jobs = 1);

enum class Trend { decreasing, bounded_away, undetermined };
std::string_view to_string(Trend trend);

struct Budgets {
  int first_level = 4;
  /// -1: min(12, window - 1).
  int last_level = -1;
  std::size_t panel = 20;
  int entry_level = 1;
  std::size_t entry_samples = 20000;
  double rate_base = 1.0;
  double rate_growth = 2.0;
  std::uint64_t seed = 1;
  SolverOptions solver{};
  std::size_t bootstrap = 200;
  std::size_t jobs = 1;
  std::size_t max_steps = kDefaultStepBudget;
};

struct Thresholds {
  double tv = 0.05;
  double resistance = 1e-3;
  double forest = 0.02;
  double shrink = 0.5;
  double plateau = 0.2;
  double entry_tv = 0.05;
};

/// last < shrink * first and last < eps: decreasing. The last three values
/// within plateau of each other and all above eps: bounded_away.
Trend classify(std::span<const double> values, double eps, const Thresholds& thresholds);

struct LevelDiagnostic {
  std::string name;
  std::vector<int> levels;
  std::vector<double> values;
  double threshold = 0.0;
  Trend trend = Trend::undetermined;
  Extrapolation limit;
};

struct EntryDiagnostic {
  int level = 0;
  TVReport tv;
  std::size_t ri_roots = 0;
  std::size_t reflected_hits = 0;
  /// "agrees", "disagrees" or "undetermined".
  std::string outcome = "undetermined";
};

struct EquivalenceReport {
  std::string graph;
  std::vector<Vertex> K;
  std::vector<std::string> K_names;
  Budgets budgets;
  Thresholds thresholds;
  LevelDiagnostic entry_tv;
  LevelDiagnostic resistance_gap;
  LevelDiagnostic forest_gap;
  EntryDiagnostic sampled_entry;
  /// "consistent", "inconsistent" or "inconclusive".
  std::string verdict = "inconclusive";
  bool partial = false;
  std::vector<std::string> notes;

  /// Verdict document; the per-level gaps are embedded as CSV text.
  nlohmann::ordered_json to_json() const;
  /// level,diagnostic,value rows with a header.
  std::string appendix_csv() const;
};

/// The four diagnostics and the verdict. Budget or solver failures give an
/// inconclusive verdict with whatever was computed.
EquivalenceReport equivalence_report(const WeightedGraph& graph, const Exhaustion& exhaustion,
                                     std::span<const Vertex> K, const Budgets& budgets,
                                     const Thresholds& thresholds = {},
                                     const std::string& graph_label = "");

}  // namespace interlab
