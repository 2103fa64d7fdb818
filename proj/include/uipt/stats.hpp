#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Censored survival estimation, tail-exponent fitting and the distributional
// tests used by the Monte Carlo suites. Statistical nulls are standard;
// p-values use asymptotic distributions (fine at the sample sizes in play).

namespace uipt::stats {

struct Sample {
  double value = 0.0;
  bool censored = false;  // true value is known to exceed `value`
};

// Geometric grid base * ratio^j, j = 0..count-1.
std::vector<double> geometric_grid(double base, double ratio, int count);

struct SurvivalCurve {
  std::vector<double> grid;
  std::vector<std::int64_t> exceed;  // #{X > grid[j]}
  std::int64_t total = 0;
  std::vector<double> wilson_lo, wilson_hi;  // 95% intervals for P(X > grid[j])

  double survival(std::size_t j) const {
    return static_cast<double>(exceed[j]) / static_cast<double>(total);
  }
};

// Empirical survival under right-censoring. A censored sample counts as an
// exceedance at every grid point <= its recorded value, which is exact
// because its true value lies beyond; all censored values must therefore
// reach the top of the grid (throws std::invalid_argument otherwise).
SurvivalCurve estimate_survival(std::span<const Sample> samples,
                                std::vector<double> grid);

// Wilson score interval for a binomial proportion.
void wilson_interval(std::int64_t successes, std::int64_t total, double z,
                     double* lo, double* hi);

struct TailFit {
  double slope = 0.0;    // OLS slope of log P(X > n) vs log n
  double stderr_ = 0.0;  // OLS standard error of the slope
  double hill_slope = 0.0;    // -alpha_hat from the Hill estimator
  double hill_stderr = 0.0;   // alpha_hat / sqrt(#exceedances)
  std::size_t fit_lo = 0, fit_hi = 0;  // grid index range, inclusive
};

// Log-log OLS over grid indices [lo, hi] plus a Hill cross-check on the raw
// uncensored exceedances of grid[lo]. Requires >= 4 usable points with >= 100
// exceedances each; throws std::invalid_argument on insufficient tail mass
// or on a curve with no decay.
TailFit fit_tail_exponent(const SurvivalCurve& curve, std::size_t lo,
                          std::size_t hi,
                          std::span<const Sample> raw_for_hill = {});

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the Kolmogorov asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
};

// Pearson goodness of fit of observed counts against a pmf. Bins with
// expected count below `min_expected` are pooled into the final bin; the
// final bin absorbs all remaining probability mass.
ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                               std::span<const double> probs,
                               double min_expected = 5.0);

// Pearson independence test of an r x c contingency table (row-major).
// Throws std::invalid_argument if any expected count is below 5.
ChiSquareResult chi_square_independence(std::span<const std::int64_t> table,
                                        std::size_t rows, std::size_t cols);

double chi_square_pvalue(double statistic, int dof);

// Hill estimate of the tail index alpha from uncensored exceedances of the
// threshold: alpha_hat = n / sum log(x_i / threshold).
double hill_tail_index(std::span<const double> values, double threshold,
                       std::size_t* n_exceed = nullptr);

}  // namespace uipt::stats
