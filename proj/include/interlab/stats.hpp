#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace interlab {

class Rng;

struct TestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Pearson goodness of fit. Cells whose expected count is below min_expected
/// are pooled into one cell.
TestResult chi_square_gof(std::span<const double> observed, std::span<const double> probabilities,
                          double min_expected = 5.0);

/// Pearson test of independence on a contingency table (rows x columns).
/// Empty rows and columns are dropped.
TestResult chi_square_independence(const std::vector<std::vector<double>>& table);

/// Average ranks (1-based), ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

struct Correlation {
  double rho = 0.0;
  /// Two-sided, from the t approximation with n - 2 degrees of freedom.
  double p_value = 1.0;
  std::size_t n = 0;
};

Correlation spearman(std::span<const double> x, std::span<const double> y);

double normal_two_sided_p(double z);

/// z scores of the sample mean and sample variance of counts against a
/// Poisson(lambda) hypothesis; Var(s^2) is approximated by
/// (lambda + 2 lambda^2) / N.
struct PoissonMoments {
  double mean = 0.0;
  double variance = 0.0;
  double z_mean = 0.0;
  double z_variance = 0.0;
};

PoissonMoments poisson_moments(std::span<const double> counts, double lambda);

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap: resamples indices 0..n-1 with replacement and
/// evaluates statistic on each resample.
Band bootstrap_band(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                    std::size_t resamples, Rng& rng, double level = 0.95);

double mean(std::span<const double> values);

}  // namespace interlab
