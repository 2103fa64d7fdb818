#pragma once

#include <cstdint>
#include <vector>

#include "uipt/rng.hpp"

// The random-walk picture behind the peeling tail exponents: the boundary
// walk Poissonized at rate 1/2 per color, descending ladder legs of the blue
// walk, last-passage legs of the red walk conditioned to stay positive (built
// exactly through the skip-free time-reversal identity), the index Lambda of
// the first descending ladder of T - U, and a joint two-walk simulation that
// checks the stopping-time inclusions pathwise.
//
// Legs have infinite expected length (their durations have tail indexes 1/3
// and 2/3), so every leg carries a jump budget. Atoms that blow the budget
// are redrawn: the kept law conditions both legs on a swap-symmetric event,
// which preserves the exchangeability of (T, U), the symmetry and
// atomlessness of T - U, and hence the universal Lambda law and the
// independence property the suites assert.

namespace uipt::ladders {

struct LegCaps {
  std::uint64_t max_jumps = std::uint64_t{1} << 20;
};

struct DescendingLeg {
  double duration = 0.0;      // T: first time the walk goes below 0
  std::int64_t height = 0;    // H = -(final position)
  std::int64_t final_jump = 0;  // L, size of the crossing jump
  std::uint64_t volume = 0;   // V^b through the final jump
  std::uint64_t jumps = 0;
  bool censored = false;
};

// Rate-1/2 walk from 0 run to its first entry into (-inf, -1].
DescendingLeg sample_unconditioned_leg_T(rng::RngStream& g,
                                         const rng::Tables& t, LegCaps caps,
                                         bool track_volume);

struct FirstPassageLeg {
  double duration = 0.0;    // U: first hitting time of +H
  std::uint64_t volume = 0;  // V^r including the final +1 jump
  std::uint64_t jumps = 0;
  bool censored = false;
};

// Rate-1/2 walk from 0 run to its first hit of height H >= 1 (skip-free
// upward, so it hits exactly). By time reversal this is distributed as
// (U_1, V^r_{U_1}) given H_1 = H. Throws for H < 1. With H = 1 this is one
// ascending ladder leg.
FirstPassageLeg sample_leg_U_given_H(rng::RngStream& g, const rng::Tables& t,
                                     std::int64_t H, LegCaps caps,
                                     bool track_volume);

struct LadderQuadruple {
  double T = 0.0;
  double U = 0.0;
  std::int64_t H = 0;
  std::uint64_t Vb = 0;
  std::uint64_t Vr = 0;
  std::uint64_t resamples = 0;  // censored atoms redrawn
};

// One i.i.d. increment of the ladder walk: a T-leg followed by a U-leg at
// the observed height. A budget-censored atom is redrawn whole.
LadderQuadruple sample_quadruple(rng::RngStream& g, const rng::Tables& t,
                                 LegCaps caps, bool track_volume);

struct LambdaResult {
  bool decided = false;      // false = Lambda > k_cap
  std::int64_t lambda = 0;   // valid when decided
  double t_sum = 0.0;        // cumulative T at the stopping index
  double u_sum = 0.0;
  std::uint64_t v_sum = 0;   // V^r + V^b accumulated over the quadruples
  std::uint64_t resamples = 0;
};

// Accumulate quadruples until T_k < U_k or k_cap atoms were used.
LambdaResult run_lambda(rng::RngStream& g, const rng::Tables& t,
                        std::int64_t k_cap, LegCaps caps, bool track_volume);

// One step of the walk conditioned to stay positive (h-transform on x >= 1):
// kernel h(x+k)/h(x) p_k, realized by rejection with acceptance
// h(x+k)/h(x+1).
std::int64_t sample_conditioned_positive_step(rng::RngStream& g,
                                              const rng::Tables& t,
                                              std::int64_t x);

struct ConditionedPathSummary {
  std::int64_t final_state = 0;
  std::int64_t min_state = 0;
  double elapsed = 0.0;
  std::uint64_t jumps = 0;
};

// Rate-1/2 h-transformed walk from r0 >= 1 run to the time cap.
ConditionedPathSummary simulate_conditioned_R(rng::RngStream& g,
                                              const rng::Tables& t,
                                              std::int64_t r0, double t_cap);

// Smallest level L with h(H+1)/h(L) <= eps: past L, a return to H or below
// escapes detection with probability at most eps.
std::int64_t last_passage_stop_level(std::int64_t H, double eps);

struct DirectLastPassage {
  double u_time = -1.0;
  std::uint64_t volume = 0;
  bool resolved = false;
};

// Last passage at height H of the conditioned walk from 1, frozen once the
// walk first reaches last_passage_stop_level(H, eps). Used as a truncated
// cross-check of sample_leg_U_given_H.
DirectLastPassage last_passage_direct(rng::RngStream& g, const rng::Tables& t,
                                      std::int64_t H, double eps,
                                      std::uint64_t max_jumps,
                                      bool track_volume);

struct JointCaps {
  std::uint64_t max_events = std::uint64_t{1} << 22;
  int max_ladders = 8;
  double eps = 0.02;
};

struct JointLadderPair {
  double T = 0.0;
  std::int64_t H = 0;
  double U = -1.0;
  bool u_resolved = false;
  bool flagged = false;  // the red walk revisited <= H after the freeze
  std::uint64_t vr_at_U = 0;
  std::uint64_t v_at_U = 0;
};

struct JointRun {
  double theta_hat = -1.0;
  bool theta_resolved = false;
  std::uint64_t vr_before_theta = 0;  // V^r at theta-
  std::uint64_t v_at_theta = 0;       // V at theta
  std::vector<JointLadderPair> ladders;
  int flagged_count = 0;
  int checks = 0;
  int violations = 0;
};

// Simulate (R conditioned from 1, B from 0) jointly in continuous time,
// compute theta_hat = inf{t : R_t + min(inf B, 0) <= 0}, the ladder times of
// B, last passages of R at the ladder heights (eps-frozen), and verify the
// four stopping-time inclusions pathwise on resolved, unflagged prefixes.
JointRun joint_two_walk_theta(rng::RngStream& g, const rng::Tables& t,
                              JointCaps caps, bool track_volume);

}  // namespace uipt::ladders
