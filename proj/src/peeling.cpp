#include "uipt/peeling.hpp"

#include <cassert>
#include <stdexcept>

namespace uipt::peel {

PeelingState new_peeling(std::int64_t r0, std::int64_t b0) {
  if (r0 < 1 || b0 < 0 || r0 + b0 < 2)
    throw std::invalid_argument("new_peeling: need r0 >= 1 and r0 + b0 >= 2");
  PeelingState st;
  st.boundary = r0 + b0;
  st.red = r0;
  st.blue = b0;
  st.last_all_red = b0 > 0 ? 1 : 0;
  return st;
}

namespace {

inline void add_saturating(std::uint64_t* acc, std::uint64_t v, bool* overflow) {
  const std::uint64_t next = *acc + v;
  if (next < *acc) *overflow = true;
  *acc = next;
}

}  // namespace

StepRecord step_peeling(PeelingState& st, rng::RngStream& g,
                        const rng::Tables& t, bool track_volume) {
  if (st.done) throw std::logic_error("step_peeling: called after theta");
  const std::int64_t m = rng::sample_conditioned_step(g, t, st.boundary);
  const std::int64_t jump = m - st.boundary;
  const bool eta = rng::sample_coloring(g);

  std::int64_t r = st.red, b = st.blue;
  if (eta) r += jump; else b += jump;
  // Reflection f: a negative overshoot moves to the other color.
  if (b < 0) { r += b; b = 0; }
  else if (r < 0) { b += r; r = 0; }

  st.red = r;
  st.blue = b;
  st.boundary = m;
  ++st.step;
  assert(st.boundary == st.red + st.blue);
  assert(st.boundary >= 2 && st.red >= 0 && st.blue >= 0 && jump <= 1);

  StepRecord rec;
  rec.red_step = eta;
  rec.jump = jump;
  if (track_volume) {
    rec.volume_added = rng::sample_boltzmann_volume(g, jump);
    add_saturating(&st.vol, rec.volume_added, &st.volume_overflow);
    if (eta) add_saturating(&st.vol_red, rec.volume_added, &st.volume_overflow);
    else add_saturating(&st.vol_blue, rec.volume_added, &st.volume_overflow);
  }

  if (r == 0) st.done = true;
  else if (b == 0) st.last_all_red = st.step;
  return rec;
}

PeelingOutcome run_to_theta(std::int64_t r0, std::int64_t b0,
                            rng::RngStream& g, const rng::Tables& t,
                            std::int64_t step_cap, std::uint64_t volume_cap,
                            bool track_volume) {
  if (step_cap < 1 || volume_cap < 1)
    throw std::invalid_argument("run_to_theta: caps must be >= 1");
  PeelingState st = new_peeling(r0, b0);
  std::uint64_t v_red_prev = 0;
  PeelingOutcome out;
  while (!st.done) {
    if (st.step >= step_cap) {
      out.censor = Censor::step_cap;
      break;
    }
    v_red_prev = st.vol_red;
    step_peeling(st, g, t, track_volume);
    if (st.volume_overflow) {
      out.censor = Censor::volume_overflow;
      break;
    }
    if (!st.done && st.vol > volume_cap) {
      out.censor = Censor::volume_cap;
      break;
    }
  }
  out.theta = st.step;
  out.delta = st.last_all_red;
  out.v_theta = st.vol;
  out.v_red_theta_minus_1 = st.done ? v_red_prev : st.vol_red;
  out.perim_lower = 1 + out.theta - out.delta;
  return out;
}

std::int64_t perimeter_lower_bound(const PeelingOutcome& o) {
  if (o.censor != Censor::none)
    throw std::invalid_argument("perimeter_lower_bound: censored outcome");
  return 1 + o.theta - o.delta;
}

}  // namespace uipt::peel
