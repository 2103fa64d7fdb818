#include "uipt/ladders.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "uipt/laws.hpp"

namespace uipt::ladders {

namespace {
constexpr double kJumpRate = 0.5;  // each color's walk jumps at rate 1/2

inline std::uint64_t jump_volume(rng::RngStream& g, std::int64_t k,
                                 bool track_volume) {
  if (!track_volume) return 0;
  return k == 1 ? 1 : rng::sample_boltzmann_volume(g, k);
}
}  // namespace

DescendingLeg sample_unconditioned_leg_T(rng::RngStream& g,
                                         const rng::Tables& t, LegCaps caps,
                                         bool track_volume) {
  DescendingLeg leg;
  std::int64_t pos = 0;
  while (leg.jumps < caps.max_jumps) {
    leg.duration += g.next_exponential(kJumpRate);
    const std::int64_t k = rng::sample_step(g, t);
    leg.volume += jump_volume(g, k, track_volume);
    pos += k;
    ++leg.jumps;
    if (pos < 0) {
      leg.height = -pos;
      leg.final_jump = -k;
      return leg;
    }
  }
  leg.censored = true;
  return leg;
}

FirstPassageLeg sample_leg_U_given_H(rng::RngStream& g, const rng::Tables& t,
                                     std::int64_t H, LegCaps caps,
                                     bool track_volume) {
  if (H < 1) throw std::invalid_argument("sample_leg_U_given_H: H must be >= 1");
  FirstPassageLeg leg;
  std::int64_t pos = 0;
  while (leg.jumps < caps.max_jumps) {
    leg.duration += g.next_exponential(kJumpRate);
    const std::int64_t k = rng::sample_step(g, t);
    leg.volume += jump_volume(g, k, track_volume);
    pos += k;
    ++leg.jumps;
    if (pos == H) return leg;  // skip-free upward: no overshoot
  }
  leg.censored = true;
  return leg;
}

LadderQuadruple sample_quadruple(rng::RngStream& g, const rng::Tables& t,
                                 LegCaps caps, bool track_volume) {
  LadderQuadruple q;
  for (;;) {
    const DescendingLeg down = sample_unconditioned_leg_T(g, t, caps, track_volume);
    if (down.censored) {
      ++q.resamples;
      continue;
    }
    const FirstPassageLeg up =
        sample_leg_U_given_H(g, t, down.height, caps, track_volume);
    if (up.censored) {
      ++q.resamples;
      continue;
    }
    q.T = down.duration;
    q.U = up.duration;
    q.H = down.height;
    q.Vb = down.volume;
    q.Vr = up.volume;
    return q;
  }
}

LambdaResult run_lambda(rng::RngStream& g, const rng::Tables& t,
                        std::int64_t k_cap, LegCaps caps, bool track_volume) {
  if (k_cap < 1) throw std::invalid_argument("run_lambda: k_cap must be >= 1");
  LambdaResult r;
  for (std::int64_t k = 1; k <= k_cap; ++k) {
    const LadderQuadruple q = sample_quadruple(g, t, caps, track_volume);
    r.resamples += q.resamples;
    r.t_sum += q.T;
    r.u_sum += q.U;
    r.v_sum += q.Vb + q.Vr;
    if (r.t_sum < r.u_sum) {
      r.decided = true;
      r.lambda = k;
      return r;
    }
  }
  return r;
}

std::int64_t sample_conditioned_positive_step(rng::RngStream& g,
                                              const rng::Tables& t,
                                              std::int64_t x) {
  if (x < 1) throw std::invalid_argument("conditioned step: x must be >= 1");
  const double hx1 = t.h(x + 1);
  for (;;) {
    const std::int64_t k = rng::sample_step(g, t);
    if (k == 1) return x + 1;
    if (x + k >= 1 && g.next_uniform() * hx1 < t.h(x + k)) return x + k;
  }
}

ConditionedPathSummary simulate_conditioned_R(rng::RngStream& g,
                                              const rng::Tables& t,
                                              std::int64_t r0, double t_cap) {
  if (r0 < 1) throw std::invalid_argument("simulate_conditioned_R: r0 must be >= 1");
  ConditionedPathSummary s;
  s.final_state = r0;
  s.min_state = r0;
  while (s.elapsed < t_cap) {
    s.elapsed += g.next_exponential(kJumpRate);
    if (s.elapsed >= t_cap) break;
    s.final_state = sample_conditioned_positive_step(g, t, s.final_state);
    s.min_state = std::min(s.min_state, s.final_state);
    ++s.jumps;
  }
  return s;
}

std::int64_t last_passage_stop_level(std::int64_t H, double eps) {
  if (H < 1 || !(eps > 0.0) || eps >= 1.0)
    throw std::invalid_argument("last_passage_stop_level: bad arguments");
  const double target = laws::harmonic_h(H + 1) / eps;
  std::int64_t lo = H + 1, hi = 2;
  while (laws::harmonic_h(hi) < target) {
    if (hi > (std::int64_t{1} << 60)) throw std::overflow_error("stop level overflow");
    hi *= 2;
  }
  if (hi < lo) hi = lo;
  while (hi - lo > 0) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (laws::harmonic_h(mid) >= target) hi = mid; else lo = mid + 1;
  }
  return lo;
}

DirectLastPassage last_passage_direct(rng::RngStream& g, const rng::Tables& t,
                                      std::int64_t H, double eps,
                                      std::uint64_t max_jumps,
                                      bool track_volume) {
  if (H < 1) throw std::invalid_argument("last_passage_direct: H must be >= 1");
  const std::int64_t stop = last_passage_stop_level(H, eps);
  DirectLastPassage out;
  std::int64_t x = 1;
  double time = 0.0;
  std::uint64_t vol = 0;
  for (std::uint64_t j = 0; j < max_jumps; ++j) {
    time += g.next_exponential(kJumpRate);
    const std::int64_t next = sample_conditioned_positive_step(g, t, x);
    vol += jump_volume(g, next - x, track_volume);
    if (x == H) {
      out.u_time = time;  // latest exit from H; final by skip-freeness
      out.volume = vol;
      out.resolved = true;
    }
    x = next;
    if (x >= stop) return out;
  }
  out.resolved = false;
  return out;
}

JointRun joint_two_walk_theta(rng::RngStream& g, const rng::Tables& t,
                              JointCaps caps, bool track_volume) {
  JointRun run;
  std::int64_t xr = 1, xb = 0;
  std::int64_t bmin = 0;  // running minimum of B
  std::uint64_t vr = 0, vb = 0;
  double t_red = g.next_exponential(kJumpRate);
  double t_blue = g.next_exponential(kJumpRate);

  struct ExitRec {
    double time;
    std::uint64_t vr_after;
    std::uint64_t v_after;
  };
  std::unordered_map<std::int64_t, ExitRec> last_exit;
  std::vector<std::int64_t> stop_levels;

  for (std::uint64_t ev = 0; ev < caps.max_events; ++ev) {
    const bool red_event = t_red < t_blue;
    const double now = red_event ? t_red : t_blue;
    const std::uint64_t vr_prev = vr;

    if (red_event) {
      const std::int64_t next = sample_conditioned_positive_step(g, t, xr);
      vr += jump_volume(g, next - xr, track_volume);
      last_exit[xr] = ExitRec{now, vr, vr + vb};
      // A frozen last passage is invalidated if R comes back to its height.
      for (std::size_t i = 0; i < run.ladders.size(); ++i) {
        JointLadderPair& lp = run.ladders[i];
        if (lp.u_resolved && !lp.flagged && next <= lp.H) {
          lp.flagged = true;
          ++run.flagged_count;
        }
      }
      xr = next;
      t_red = now + g.next_exponential(kJumpRate);
    } else {
      const std::int64_t k = rng::sample_step(g, t);
      vb += jump_volume(g, k, track_volume);
      xb += k;
      if (xb < bmin) {
        bmin = xb;
        JointLadderPair lp;
        lp.T = now;
        lp.H = -xb;
        run.ladders.push_back(lp);
        stop_levels.push_back(last_passage_stop_level(lp.H, caps.eps));
      }
      t_blue = now + g.next_exponential(kJumpRate);
    }

    if (!run.theta_resolved && xr + std::min(bmin, std::int64_t{0}) <= 0) {
      run.theta_resolved = true;
      run.theta_hat = now;
      run.vr_before_theta = vr_prev;
      run.v_at_theta = vr + vb;
    }

    // Freeze last passages the red walk has outrun.
    bool all_resolved = !run.ladders.empty();
    for (std::size_t i = 0; i < run.ladders.size(); ++i) {
      JointLadderPair& lp = run.ladders[i];
      if (!lp.u_resolved && xr >= stop_levels[i]) {
        const auto it = last_exit.find(lp.H);
        if (it != last_exit.end()) {
          lp.U = it->second.time;
          lp.vr_at_U = it->second.vr_after;
          lp.v_at_U = it->second.v_after;
          lp.u_resolved = true;
        }
      }
      all_resolved = all_resolved && lp.u_resolved;
    }
    if (run.theta_resolved && all_resolved &&
        static_cast<int>(run.ladders.size()) >= caps.max_ladders)
      break;
  }

  // Evaluate the four inclusions on resolved, unflagged prefixes.
  double t_n = 0.0;
  bool prefix_all_above = true;  // so far: T_i > U_i for every i <= n
  for (std::size_t n = 0; n < run.ladders.size(); ++n) {
    const JointLadderPair& lp = run.ladders[n];
    if (!lp.u_resolved || lp.flagged) break;
    t_n = lp.T;
    const double u_n = lp.U;
    if (t_n > u_n) {
      if (prefix_all_above) {
        ++run.checks;
        if (run.theta_resolved && !(run.theta_hat > t_n)) ++run.violations;
        if (track_volume) {
          ++run.checks;
          const std::uint64_t vr_theta_minus =
              run.theta_resolved ? run.vr_before_theta : vr;
          if (!(vr_theta_minus >= lp.vr_at_U)) ++run.violations;
        }
      }
    } else {
      prefix_all_above = false;
      ++run.checks;
      if (!run.theta_resolved) {
        ++run.violations;  // theta beyond the horizon yet U_n is inside it
      } else if (!(run.theta_hat < u_n)) {
        ++run.violations;
      }
      if (track_volume && run.theta_resolved) {
        ++run.checks;
        if (!(run.v_at_theta <= lp.v_at_U)) ++run.violations;
      }
    }
  }
  return run;
}

}  // namespace uipt::ladders
