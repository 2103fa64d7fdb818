#include "uipt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "uipt/laws.hpp"

namespace uipt::rng {

double RngStream::next_exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
  return -std::log1p(-next_uniform()) / rate;
}

Tables::Tables(std::size_t table_size) {
  if (table_size < 1) table_size = 1;
  cum_.resize(table_size + 1);
  cum_[0] = laws::kStepUp;
  double sum = laws::kStepUp, comp = 0.0;
  double p = 0.25;  // p_{-1}
  for (std::size_t j = 1; j <= table_size; ++j) {
    const double y = p - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    cum_[j] = sum;
    last_mass_ = p;
    p *= laws::step_ratio(static_cast<std::int64_t>(j));
  }
  h_.resize(table_size + 1);
  h_[0] = 0.0;
  for (std::size_t k = 1; k <= table_size; ++k)
    h_[k] = laws::harmonic_h(static_cast<std::int64_t>(k));
}

double Tables::h(std::int64_t k) const {
  if (k <= 0) return 0.0;
  if (static_cast<std::size_t>(k) < h_.size()) return h_[static_cast<std::size_t>(k)];
  return laws::harmonic_h(k);
}

const Tables& Tables::global() {
  static const Tables t;
  return t;
}

std::int64_t sample_step(RngStream& g, const Tables& t) {
  const double u = g.next_uniform();
  if (u < laws::kStepUp) return 1;
  const std::size_t K = t.table_size();
  if (u < t.step_cum(K)) {
    // First j with u < cum(j); entry j holds the mass of -j.
    std::size_t lo = 0, hi = K;  // invariant: cum(lo) <= u < cum(hi)
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (u < t.step_cum(mid)) hi = mid; else lo = mid;
    }
    return -static_cast<std::int64_t>(hi);
  }
  // Beyond the table: extend masses on demand.
  double p = t.last_mass();
  double c = t.step_cum(K);
  std::int64_t k = static_cast<std::int64_t>(K);
  for (;;) {
    p *= laws::step_ratio(k);
    ++k;
    const double cn = c + p;
    if (u < cn || !(cn > c)) return -k;  // stall means the tail is below FP resolution
    c = cn;
    if (k >= (std::int64_t{1} << 48)) {
      std::fprintf(stderr, "sample_step: tail extension passed 2^48 (u=%.17g)\n", u);
      std::abort();
    }
  }
}

std::int64_t sample_conditioned_step(RngStream& g, const Tables& t, std::int64_t n) {
  if (n < 2) throw std::invalid_argument("sample_conditioned_step: n must be >= 2");
  const double hn = t.h(n);
  for (;;) {
    const std::int64_t k = sample_step(g, t);
    if (k == 1) return n + 1;  // h(n)/h(n) = 1
    const std::int64_t x = n - 1 + k;
    if (x >= 1 && g.next_uniform() * hn < t.h(x)) return n + k;
  }
}

std::uint64_t sample_boltzmann_volume(RngStream& g, std::int64_t jump) {
  if (jump == 1) return 1;
  if (jump >= 0) throw std::invalid_argument("sample_boltzmann_volume: jump must be +1 or <= -1");
  const std::int64_t d = 1 - jump;
  const double u = g.next_uniform();
  // Streaming inversion. For large d the first masses underflow doubles, so
  // walk the ratio recurrence in log space until they are representable; the
  // cumulative mass skipped that way is far below the 2^-53 resolution of u.
  constexpr double kLogTiny = -700.0;
  double lp = laws::boltzmann_volume_log_pmf0(d);
  std::uint64_t n = 0;
  while (lp < kLogTiny) {
    lp += std::log(laws::boltzmann_volume_ratio(d, static_cast<std::int64_t>(n)));
    ++n;
  }
  double p = std::exp(lp);
  double c = p;
  while (c <= u) {
    p *= laws::boltzmann_volume_ratio(d, static_cast<std::int64_t>(n));
    ++n;
    const double cn = c + p;
    if (!(cn > c)) break;  // tail below FP resolution
    c = cn;
  }
  return n;
}

bool sample_coloring(RngStream& g) { return g.next_bit(); }

double sample_exponential(RngStream& g, double rate) {
  return g.next_exponential(rate);
}

}  // namespace uipt::rng
