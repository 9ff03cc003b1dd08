#include "interlab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "interlab/error.hpp"
#include "interlab/samplers.hpp"

namespace interlab {

namespace {

double chi2_upper(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(statistic, 0.0)));
}

}  // namespace

TestResult chi_square_gof(std::span<const double> observed, std::span<const double> probabilities,
                          double min_expected) {
  require(observed.size() == probabilities.size() && !observed.empty(),
          ErrorCode::invalid_argument, "observed counts and probabilities differ in size");
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  const double mass = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  require(total > 0.0 && mass > 0.0, ErrorCode::invalid_argument, "empty goodness-of-fit test");
  TestResult r;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double expected = total * probabilities[i] / mass;
    if (expected < min_expected) {
      pooled_obs += observed[i];
      pooled_exp += expected;
      continue;
    }
    double d = observed[i] - expected;
    r.statistic += d * d / expected;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    double d = pooled_obs - pooled_exp;
    r.statistic += d * d / pooled_exp;
    ++cells;
  } else if (pooled_obs > 0.0) {
    // observations where the hypothesis puts no mass
    r.statistic = std::numeric_limits<double>::infinity();
    r.dof = std::max(cells - 1, 1);
    r.p_value = 0.0;
    return r;
  }
  r.dof = cells - 1;
  r.p_value = chi2_upper(r.statistic, r.dof);
  return r;
}

TestResult chi_square_independence(const std::vector<std::vector<double>>& table) {
  require(!table.empty(), ErrorCode::invalid_argument, "empty contingency table");
  const std::size_t cols = table.front().size();
  std::vector<double> row_sum, col_sum(cols, 0.0);
  std::vector<std::size_t> rows_kept;
  for (std::size_t i = 0; i < table.size(); ++i) {
    require(table[i].size() == cols, ErrorCode::invalid_argument, "ragged contingency table");
    double s = std::accumulate(table[i].begin(), table[i].end(), 0.0);
    if (s > 0.0) rows_kept.push_back(i);
    row_sum.push_back(s);
    for (std::size_t j = 0; j < cols; ++j) col_sum[j] += table[i][j];
  }
  std::vector<std::size_t> cols_kept;
  for (std::size_t j = 0; j < cols; ++j) {
    if (col_sum[j] > 0.0) cols_kept.push_back(j);
  }
  const double total = std::accumulate(row_sum.begin(), row_sum.end(), 0.0);
  TestResult r;
  if (rows_kept.size() < 2 || cols_kept.size() < 2) return r;
  for (std::size_t i : rows_kept) {
    for (std::size_t j : cols_kept) {
      double expected = row_sum[i] * col_sum[j] / total;
      double d = table[i][j] - expected;
      r.statistic += d * d / expected;
    }
  }
  r.dof = static_cast<double>((rows_kept.size() - 1) * (cols_kept.size() - 1));
  r.p_value = chi2_upper(r.statistic, r.dof);
  return r;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::invalid_argument, "samples differ in length");
  Correlation c;
  c.n = x.size();
  if (c.n < 3) return c;
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return c;
  c.rho = sxy / std::sqrt(sxx * syy);
  const double dof = static_cast<double>(c.n) - 2.0;
  if (std::abs(c.rho) >= 1.0) {
    c.p_value = 0.0;
    return c;
  }
  double t = c.rho * std::sqrt(dof / (1.0 - c.rho * c.rho));
  boost::math::students_t dist(dof);
  c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return c;
}

double normal_two_sided_p(double z) {
  boost::math::normal dist;
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(z)));
}

PoissonMoments poisson_moments(std::span<const double> counts, double lambda) {
  require(counts.size() >= 2, ErrorCode::invalid_argument, "need at least two counts");
  require(lambda > 0.0, ErrorCode::invalid_argument, "Poisson mean must be positive");
  PoissonMoments m;
  const double n = static_cast<double>(counts.size());
  m.mean = mean(counts);
  double ss = 0.0;
  for (double c : counts) ss += (c - m.mean) * (c - m.mean);
  m.variance = ss / (n - 1.0);
  m.z_mean = (m.mean - lambda) / std::sqrt(lambda / n);
  m.z_variance = (m.variance - lambda) / std::sqrt((lambda + 2.0 * lambda * lambda) / n);
  return m;
}

Band bootstrap_band(std::size_t n,
                    const std::function<double(std::span<const std::size_t>)>& statistic,
                    std::size_t resamples, Rng& rng, double level) {
  require(n > 0 && resamples > 0, ErrorCode::invalid_argument, "empty bootstrap");
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<std::size_t> idx(n);
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& i : idx) i = rng.below(n);
    stats.push_back(statistic(idx));
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - level) / 2.0;
  auto pick = [&](double q) {
    auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1) + 0.5));
    return stats[std::min(k, resamples - 1)];
  };
  return Band{pick(alpha), pick(1.0 - alpha)};
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace interlab
