#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Deterministic, splittable random streams plus inversion/rejection samplers
// for every law in uipt::laws. A stream is a Weyl sequence with a per-stream
// odd increment pushed through the splitmix64 finalizer, so replicate i can
// be reproduced in isolation from (master_seed, stream_id) regardless of
// thread scheduling or platform.

namespace uipt::rng {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : base_(mix64(master_seed ^ mix64(stream_id + 0x9E3779B97F4A7C15ull))),
        gamma_(mix64(mix64(stream_id) + master_seed) | 1ull) {}

  std::uint64_t next_u64() { return mix64(base_ + (counter_++) * gamma_); }

  // Uniform on [0, 1), 53-bit resolution.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Strictly positive exponential holding time.
  double next_exponential(double rate);

  bool next_bit() { return (next_u64() >> 63) != 0; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t gamma_;
  std::uint64_t counter_ = 0;
};

// Immutable shared tables: the cumulative inversion table for the step law
// over {+1, -1, ..., -K} and a cache of the harmonic function h. Build once,
// share across threads.
class Tables {
 public:
  explicit Tables(std::size_t table_size = std::size_t{1} << 20);

  std::size_t table_size() const { return cum_.size() - 1; }

  // 2/3 + p_{-1} + ... + p_{-j}; cum(0) = 2/3.
  double step_cum(std::size_t j) const { return cum_[j]; }

  // Mass p_{-K} of the last tabulated entry, the seed for on-demand
  // extension through the ratio recurrence.
  double last_mass() const { return last_mass_; }

  double h(std::int64_t k) const;

  // Process-wide default table (K = 2^20).
  static const Tables& global();

 private:
  std::vector<double> cum_;
  std::vector<double> h_;
  double last_mass_;
};

// One step of the boundary walk: k with probability p_k. Inversion by binary
// search; uniforms beyond the table extend the cumulative on demand with the
// ratio recurrence (hard cap 2^48, reached with probability < 1e-50 per draw).
std::int64_t sample_step(RngStream& g, const Tables& t);

// One step of the boundary size under the peeling law from n >= 2: m with
// probability kernel_pmf(n, m). Rejection: propose k ~ p, accept with
// probability h(n-1+k)/h(n); overall acceptance is h(n-1)/h(n) >= 2/3.
std::int64_t sample_conditioned_step(RngStream& g, const Tables& t,
                                     std::int64_t n);

// Inner-vertex count of the Boltzmann triangulation swallowed by a boundary
// jump: 1 for jump = +1, else Y^{(d)} with d = 1 - jump by streaming
// inversion along the pmf ratio recurrence. Rejects jump = 0 and jump > 1.
std::uint64_t sample_boltzmann_volume(RngStream& g, std::int64_t jump);

// Bernoulli(1/2) step color; true = red.
bool sample_coloring(RngStream& g);

// Exponential holding time; rejects rate <= 0.
double sample_exponential(RngStream& g, double rate);

}  // namespace uipt::rng
