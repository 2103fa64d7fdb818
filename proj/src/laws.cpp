#include "uipt/laws.hpp"

#include <cmath>
#include <stdexcept>

namespace uipt::laws {

namespace {

constexpr double kLog2 = 0.6931471805599453094;
constexpr double kLog4over27 = -1.9095425048844386;   // log(4/27)
constexpr double kLog4over9 = -0.81093021621632877;   // log(4/9)

double lgamma_d(double x) { return std::lgamma(x); }

}  // namespace

double log_step_pmf_neg(std::int64_t j) {
  // p_{-j} = 2 (2j-2)! / (4^j (j-1)! (j+1)!)
  const double jd = static_cast<double>(j);
  return kLog2 + lgamma_d(2 * jd - 1) - 2 * jd * kLog2 -
         lgamma_d(jd) - lgamma_d(jd + 2);
}

double step_pmf(std::int64_t k) {
  if (k == 1) return kStepUp;
  if (k >= 0 || k < -(1ll << 62)) return 0.0;
  const std::int64_t j = -k;
  if (j == 1) return 0.25;
  if (j == 2) return 1.0 / 24.0;
  return std::exp(log_step_pmf_neg(j));
}

double step_ratio(std::int64_t j) {
  return static_cast<double>(2 * j - 1) / static_cast<double>(2 * (j + 2));
}

double step_tail(std::int64_t k) {
  if (k < 1) throw std::invalid_argument("step_tail: k must be >= 1");
  // 1/3 minus the finite sum of p_{-1}..p_{-(k-1)}, Kahan-compensated.
  double sum = 0.0, comp = 0.0;
  double p = 0.25;
  for (std::int64_t j = 1; j < k; ++j) {
    const double y = p - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    p *= step_ratio(j);
  }
  return 1.0 / 3.0 - sum;
}

double step_cdf(std::int64_t j) {
  if (j >= 1) return 1.0;
  if (j == 0) return 1.0 / 3.0;
  return step_tail(-j);
}

double central_binomial_scaled(std::int64_t m) {
  if (m <= 0) return 1.0;
  const double md = static_cast<double>(m);
  return std::exp(lgamma_d(2 * md + 1) - 2 * lgamma_d(md + 1) -
                  2 * md * kLog2);
}

double step_first_moment_tail(std::int64_t K) {
  if (K < 0) K = 0;
  const double c = central_binomial_scaled(K);
  return c * static_cast<double>(3 * K + 2) / (3.0 * static_cast<double>(K + 1));
}

double harmonic_h(std::int64_t k) {
  if (k <= 0) return 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(lgamma_d(kd + 0.5) - lgamma_d(kd));
}

double kernel_pmf(std::int64_t n, std::int64_t m) {
  if (n < 2) throw std::invalid_argument("kernel_pmf: n must be >= 2");
  if (m < 2 || m > n + 1) return 0.0;
  const std::int64_t k = m - n;
  double logp;
  if (k == 1) {
    logp = std::log(kStepUp);
  } else if (k == 0) {
    return 0.0;
  } else {
    logp = log_step_pmf_neg(-k);
  }
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  return std::exp(lgamma_d(md - 0.5) - lgamma_d(md - 1) -
                  lgamma_d(nd - 0.5) + lgamma_d(nd - 1) + logp);
}

double boltzmann_volume_log_pmf0(std::int64_t d) {
  const double dd = static_cast<double>(d);
  return kLog2 + std::log(2 * dd - 3) + std::log(dd) + std::log(dd - 1) +
         lgamma_d(2 * dd - 3) - lgamma_d(2 * dd - 1) + (dd - 1) * kLog4over9;
}

double boltzmann_volume_pmf(std::int64_t d, std::int64_t n) {
  if (n < 0) return 0.0;
  if (d < 2) return n == 1 ? 1.0 : 0.0;
  const double dd = static_cast<double>(d), nd = static_cast<double>(n);
  return std::exp(kLog2 + std::log(2 * dd - 3) + std::log(dd) +
                  std::log(dd - 1) + lgamma_d(2 * dd + 3 * nd - 3) -
                  lgamma_d(nd + 1) - lgamma_d(2 * dd + 2 * nd - 1) +
                  nd * kLog4over27 + (dd - 1) * kLog4over9);
}

double boltzmann_volume_ratio(std::int64_t d, std::int64_t n) {
  const double dd = static_cast<double>(d), nd = static_cast<double>(n);
  return (4.0 / 27.0) * (2 * dd + 3 * nd - 1) * (2 * dd + 3 * nd - 2) *
         (2 * dd + 3 * nd - 3) /
         ((nd + 1) * (2 * dd + 2 * nd) * (2 * dd + 2 * nd - 1));
}

double boltzmann_volume_mean(std::int64_t d) {
  if (d < 2) throw std::invalid_argument("boltzmann_volume_mean: d must be >= 2");
  return static_cast<double>((d - 1) * (2 * d - 3)) / 3.0;
}

double ladder_height_pmf(std::int64_t k) {
  if (k < 1) return 0.0;
  return step_tail(k) / kStepUp;
}

double ladder_jump_pmf(std::int64_t k) {
  if (k < 1) return 0.0;
  return static_cast<double>(k) * step_pmf(-k) / kStepUp;
}

double lambda_pmf(std::int64_t n) {
  if (n < 1) return 0.0;
  if (n <= 30) {
    // Catalan(n-1) fits a double exactly up to n = 30.
    double cat = 1.0;
    for (std::int64_t i = 1; i < n; ++i)
      cat = cat * static_cast<double>(2 * (2 * i - 1)) / static_cast<double>(i + 1);
    return std::ldexp(cat, static_cast<int>(-(2 * n - 1)));
  }
  const double nd = static_cast<double>(n);
  return std::exp(lgamma_d(2 * nd - 1) - lgamma_d(nd) - lgamma_d(nd + 1) -
                  (2 * nd - 1) * kLog2);
}

double lambda_tail(std::int64_t n) {
  if (n < 1) return 1.0;
  return central_binomial_scaled(n);
}

double annealed_tail_constant() {
  return std::exp(1.5 * kLog2 - 1.75 * std::log(3.0) - lgamma_d(0.25));
}

}  // namespace uipt::laws
