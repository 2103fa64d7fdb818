#include "uipt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace uipt::stats {

std::vector<double> geometric_grid(double base, double ratio, int count) {
  if (!(base > 0.0) || !(ratio > 1.0) || count < 1)
    throw std::invalid_argument("geometric_grid: need base > 0, ratio > 1, count >= 1");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) g[static_cast<std::size_t>(j)] = base * std::pow(ratio, j);
  return g;
}

void wilson_interval(std::int64_t successes, std::int64_t total, double z,
                     double* lo, double* hi) {
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  *lo = std::max(0.0, center - half);
  *hi = std::min(1.0, center + half);
}

SurvivalCurve estimate_survival(std::span<const Sample> samples,
                                std::vector<double> grid) {
  if (grid.empty() || samples.empty())
    throw std::invalid_argument("estimate_survival: empty input");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("estimate_survival: grid must be sorted");
  const double top = grid.back();
  SurvivalCurve c;
  c.grid = std::move(grid);
  c.exceed.assign(c.grid.size(), 0);
  c.total = static_cast<std::int64_t>(samples.size());
  for (const Sample& s : samples) {
    if (s.censored && s.value < top)
      throw std::invalid_argument("estimate_survival: censored sample below grid max");
    for (std::size_t j = 0; j < c.grid.size(); ++j) {
      const bool exceeds = s.censored ? s.value >= c.grid[j] : s.value > c.grid[j];
      if (!exceeds) break;  // exceedance is monotone down the grid
      ++c.exceed[j];
    }
  }
  c.wilson_lo.resize(c.grid.size());
  c.wilson_hi.resize(c.grid.size());
  for (std::size_t j = 0; j < c.grid.size(); ++j)
    wilson_interval(c.exceed[j], c.total, 1.959963984540054,
                    &c.wilson_lo[j], &c.wilson_hi[j]);
  return c;
}

double hill_tail_index(std::span<const double> values, double threshold,
                       std::size_t* n_exceed) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (v > threshold) {
      sum += std::log(v / threshold);
      ++n;
    }
  }
  if (n_exceed) *n_exceed = n;
  if (n == 0 || sum <= 0.0)
    throw std::invalid_argument("hill_tail_index: no usable exceedances");
  return static_cast<double>(n) / sum;
}

TailFit fit_tail_exponent(const SurvivalCurve& curve, std::size_t lo,
                          std::size_t hi, std::span<const Sample> raw_for_hill) {
  if (hi >= curve.grid.size() || lo > hi)
    throw std::invalid_argument("fit_tail_exponent: bad fit range");
  std::vector<double> xs, ys;
  for (std::size_t j = lo; j <= hi; ++j) {
    if (curve.exceed[j] < 100) continue;  // need tail mass at every point
    xs.push_back(std::log(curve.grid[j]));
    ys.push_back(std::log(curve.survival(j)));
  }
  const std::size_t m = xs.size();
  if (m < 4)
    throw std::invalid_argument("fit_tail_exponent: fewer than 4 points with >= 100 exceedances");
  double xbar = 0, ybar = 0;
  for (std::size_t i = 0; i < m; ++i) { xbar += xs[i]; ybar += ys[i]; }
  xbar /= static_cast<double>(m); ybar /= static_cast<double>(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_tail_exponent: degenerate grid");
  double syy = 0;
  for (std::size_t i = 0; i < m; ++i) syy += (ys[i] - ybar) * (ys[i] - ybar);
  if (syy == 0.0) throw std::invalid_argument("fit_tail_exponent: curve has no decay");
  TailFit fit;
  fit.fit_lo = lo;
  fit.fit_hi = hi;
  fit.slope = sxy / sxx;
  double ss_res = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ys[i] - ybar - fit.slope * (xs[i] - xbar);
    ss_res += r * r;
  }
  fit.stderr_ = m > 2 ? std::sqrt(ss_res / (static_cast<double>(m) - 2) / sxx) : 0.0;
  if (!raw_for_hill.empty()) {
    std::vector<double> vals;
    vals.reserve(raw_for_hill.size());
    for (const Sample& s : raw_for_hill)
      if (!s.censored) vals.push_back(s.value);
    std::size_t n = 0;
    const double alpha = hill_tail_index(vals, curve.grid[lo], &n);
    fit.hill_slope = -alpha;
    fit.hill_stderr = alpha / std::sqrt(static_cast<double>(n));
  }
  return fit;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    if (term < 1e-300) break;
    sum += (j % 2 == 1) ? term : -term;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  double d = 0.0, fa = 0.0, fb = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    fa = static_cast<double>(i) / na;
    fb = static_cast<double>(j) / nb;
    d = std::max(d, std::fabs(fa - fb));
  }
  KsResult r;
  r.statistic = d;
  const double ne = std::sqrt(na * nb / (na + nb));
  // Stephens' small-sample adjustment on top of the Kolmogorov limit.
  r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

double chi_square_pvalue(double statistic, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_square_pvalue: dof < 1");
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                               std::span<const double> probs,
                               double min_expected) {
  if (observed.size() != probs.size() || observed.size() < 2)
    throw std::invalid_argument("chi_square_gof: bad table");
  std::int64_t total = 0;
  for (auto o : observed) total += o;
  const double n = static_cast<double>(total);
  // Merge adjacent bins left to right until every cell has enough expected mass.
  std::vector<double> exp_counts;
  std::vector<std::int64_t> obs_counts;
  double ce = 0.0;
  std::int64_t co = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ce += n * probs[i];
    co += observed[i];
    if (ce >= min_expected) {
      exp_counts.push_back(ce);
      obs_counts.push_back(co);
      ce = 0.0;
      co = 0;
    }
  }
  if ((ce > 0.0 || co > 0) && !exp_counts.empty()) {
    exp_counts.back() += ce;
    obs_counts.back() += co;
  }
  if (exp_counts.size() < 2)
    throw std::invalid_argument("chi_square_gof: table collapses under pooling");
  double stat = 0.0;
  for (std::size_t i = 0; i < exp_counts.size(); ++i) {
    const double diff = static_cast<double>(obs_counts[i]) - exp_counts[i];
    stat += diff * diff / exp_counts[i];
  }
  ChiSquareResult r;
  r.statistic = stat;
  r.dof = static_cast<int>(exp_counts.size()) - 1;
  r.p_value = chi_square_pvalue(stat, r.dof);
  return r;
}

ChiSquareResult chi_square_independence(std::span<const std::int64_t> table,
                                        std::size_t rows, std::size_t cols) {
  if (rows < 2 || cols < 2 || table.size() != rows * cols)
    throw std::invalid_argument("chi_square_independence: bad table shape");
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = static_cast<double>(table[i * cols + j]);
      row_sum[i] += v;
      col_sum[j] += v;
      total += v;
    }
  if (total <= 0.0) throw std::invalid_argument("chi_square_independence: empty table");
  double stat = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double e = row_sum[i] * col_sum[j] / total;
      if (e < 5.0)
        throw std::invalid_argument("chi_square_independence: expected count below 5, pool first");
      const double diff = static_cast<double>(table[i * cols + j]) - e;
      stat += diff * diff / e;
    }
  ChiSquareResult r;
  r.statistic = stat;
  r.dof = static_cast<int>((rows - 1) * (cols - 1));
  r.p_value = chi_square_pvalue(stat, r.dof);
  return r;
}

}  // namespace uipt::stats
