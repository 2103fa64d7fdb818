#pragma once

#include <cstdint>

#include "uipt/rng.hpp"

// The peeling Markov chain of the boundary of a critical site-percolated
// triangulation: boundary size S, red/blue counts (R, B) evolved through the
// quadrant reflection, the peeling time theta (first step with R = 0), the
// last all-red step Delta, and the three volume processes V, V^r, V^b.

namespace uipt::peel {

struct PeelingState {
  std::int64_t boundary = 0;  // S = R + B, always >= 2
  std::int64_t red = 0;
  std::int64_t blue = 0;
  std::int64_t step = 0;
  std::uint64_t vol = 0;
  std::uint64_t vol_red = 0;
  std::uint64_t vol_blue = 0;
  std::int64_t last_all_red = 1;  // Delta tracker; stays 1 if B never hits 0
  bool done = false;              // theta reached (R == 0)
  bool volume_overflow = false;
};

// Start from a separated boundary with r0 red and b0 blue vertices. The root
// edge gives (1,1). Throws std::invalid_argument for r0 < 1 or r0 + b0 < 2.
PeelingState new_peeling(std::int64_t r0, std::int64_t b0);

struct StepRecord {
  bool red_step = false;        // eta
  std::int64_t jump = 0;        // S_{n+1} - S_n
  std::uint64_t volume_added = 0;
};

// One peeling step: draw m ~ kernel(S, .), color eta, apply the reflection,
// credit the swallowed Boltzmann volume to V and to V^r or V^b by eta.
// Throws std::logic_error if called after theta. With track_volume = false
// no volume variates are drawn.
StepRecord step_peeling(PeelingState& st, rng::RngStream& g,
                        const rng::Tables& t, bool track_volume = true);

enum class Censor : std::uint8_t {
  none = 0,
  step_cap = 1,
  volume_cap = 2,
  volume_overflow = 3,
};

struct PeelingOutcome {
  std::int64_t theta = 0;  // peeling time, or steps taken when censored
  Censor censor = Censor::none;
  std::int64_t delta = 1;
  std::uint64_t v_theta = 0;
  std::uint64_t v_red_theta_minus_1 = 0;
  std::int64_t perim_lower = 0;  // 1 + theta - delta (valid when uncensored)
};

PeelingOutcome run_to_theta(std::int64_t r0, std::int64_t b0,
                            rng::RngStream& g, const rng::Tables& t,
                            std::int64_t step_cap, std::uint64_t volume_cap,
                            bool track_volume = true);

// Exact lower bound 1 + theta - Delta for the hull perimeter (the boundary
// edge count also includes the E >= 0 edges of the final swallowed region,
// and is upper bounded by 2 + theta + an independent copy of theta, which is
// exercised statistically through the theta tail rather than pathwise).
// Throws std::invalid_argument on censored outcomes.
std::int64_t perimeter_lower_bound(const PeelingOutcome& o);

}  // namespace uipt::peel
