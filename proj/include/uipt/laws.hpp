#pragma once

#include <cstdint>

// Closed-form laws of the boundary walk of a peeled type-II triangulation and
// of the derived ladder/volume quantities. Everything here is a pure function
// of its arguments; factorial expressions are evaluated in log-gamma space so
// the pmfs stay usable hundreds of orders of magnitude below 1.

namespace uipt::laws {

// p_1 = 2/3, the only upward step mass of the boundary walk.
inline constexpr double kStepUp = 2.0 / 3.0;

// Step law p_k of the skip-free boundary walk: p_1 = 2/3, p_0 = 0,
// p_k = 0 for k >= 2 and p_{-j} = 2(2j-2)! / (4^j (j-1)! (j+1)!).
double step_pmf(std::int64_t k);

// log p_{-j} for j >= 1.
double log_step_pmf_neg(std::int64_t j);

// p_{-(j+1)} / p_{-j} = (2j-1) / (2(j+2)), exact in rational arithmetic.
double step_ratio(std::int64_t j);

// P(xi <= -k) for k >= 1, computed as the exact finite complement
// 1 - p_1 - sum_{j<k} p_{-j}; never as an infinite tail sum.
double step_tail(std::int64_t k);

// P(xi <= j) for any integer j.
double step_cdf(std::int64_t j);

// sum_{j>K} j p_{-j}, exact: the summand telescopes through
// c_m = binom(2m,m)/4^m as j p_{-j} = (1/2)(d_{j-1} - d_j) with
// d_m = c_m (6m+4)/(3(m+1)), so the tail equals c_K (3K+2)/(3(K+1)).
// At K = 0 this is 2/3 = p_1, i.e. the zero-mean identity.
double step_first_moment_tail(std::int64_t K);

// binom(2m, m) / 4^m.
double central_binomial_scaled(std::int64_t m);

// h(k) = Gamma(k+1/2)/Gamma(k) for k >= 1, 0 otherwise. Harmonic for the
// step law on k >= 1, nondecreasing, subadditive, h(k) ~ sqrt(k).
double harmonic_h(std::int64_t k);

// Transition kernel of the boundary size under the peeling law:
// p_{n,m} = h(m-1)/h(n-1) p_{m-n} for n,m >= 2, zero for m outside [2, n+1].
// Throws std::invalid_argument for n < 2.
double kernel_pmf(std::int64_t n, std::int64_t m);

// Number of inner vertices of a free Boltzmann triangulation of the d-gon:
// P(Y = n) = 2 (2d-3) d (d-1) (2d+3n-4)! / (n! (2d+2n-2)!) (4/27)^n (4/9)^{d-1}.
// For d < 2 the law is the point mass at 1.
double boltzmann_volume_pmf(std::int64_t d, std::int64_t n);

// log P(Y^{(d)} = 0) for d >= 2.
double boltzmann_volume_log_pmf0(std::int64_t d);

// P(Y=n+1)/P(Y=n) = (4/27)(2d+3n-1)(2d+3n-2)(2d+3n-3)/((n+1)(2d+2n)(2d+2n-1)).
double boltzmann_volume_ratio(std::int64_t d, std::int64_t n);

// E[Y^{(d)}] = (d-1)(2d-3)/3 for d >= 2.
double boltzmann_volume_mean(std::int64_t d);

// Strict descending ladder height of the step walk: P(H=k) = P(xi <= -k)/p_1.
double ladder_height_pmf(std::int64_t k);

// Size of the jump at the first descent: P(L=k) = k p_{-k}/p_1.
double ladder_jump_pmf(std::int64_t k);

// P(Lambda = n): n-th Taylor coefficient of 1 - sqrt(1-s), i.e.
// Catalan(n-1)/2^{2n-1}. Exact dyadic values for small n.
double lambda_pmf(std::int64_t n);

// P(Lambda > n) = binom(2n, n)/4^n.
double lambda_tail(std::int64_t n);

// Tail constant of the annealed Boltzmann volume of one peeling step:
// P(Y^{(X)} > x) ~ c x^{-3/4} with c = 2^{3/2} / (3^{7/4} Gamma(1/4)).
double annealed_tail_constant();

}  // namespace uipt::laws
