#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uipt/peeling.hpp"
#include "uipt/stats.hpp"

// Monte Carlo harness: reproducible parallel batches, censored survival
// curves, tail-exponent criteria and the distributional-identity suites,
// persisted as CSV data plus a JSON report. Replicate i always runs on
// RngStream(batch_seed, i), so results are independent of scheduling and a
// rerun with the same config is byte-identical (timing aside).

namespace uipt::experiments {

struct GridSpec {
  double base = 100.0;
  double ratio = 1.7782794100389228;  // 10^(1/4)
  int count = 9;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 42;
  std::int64_t replicates = 100000;
  std::int64_t step_cap = 10000;
  std::uint64_t volume_cap = std::uint64_t{1} << 62;
  GridSpec grid;
  int fit_lo = 0;
  int fit_hi = -1;  // -1: last grid index
  double significance = 1e-3;
  int workers = 0;  // 0: UIPT_PEEL_WORKERS env var, else hardware
  // peeling
  std::int64_t r0 = 1, b0 = 1;
  bool root_coloring_random = false;
  bool track_volume = false;
  // ladder suites
  std::uint64_t quad_leg_cap = std::uint64_t{1} << 20;
  std::uint64_t lambda_leg_cap = std::uint64_t{1} << 16;
  std::int64_t lambda_k_cap = 21;
  std::int64_t asc_replicates = 1000000;
  std::int64_t annealed_draws = 10000000;
  std::int64_t harris_walks = 1000000;
  int harris_steps = 50;
};

struct Criterion {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Report {
  std::string suite;
  ExperimentConfig config;
  std::vector<Criterion> criteria;
  std::string data_csv;          // suite data table, deterministic
  double wall_seconds = 0.0;
  bool all_pass() const;
};

// Suites: theta_tails, volume_tails, perimeter_tails, identities,
// laws_selfcheck. Throws std::invalid_argument for unknown ids.
Report run_suite(const ExperimentConfig& cfg, std::string_view suite_id);

// Acceptance-grade defaults for a suite (seeds, caps, grids pinned).
ExperimentConfig default_config(std::string_view suite_id);

nlohmann::ordered_json config_json(const ExperimentConfig& cfg);
nlohmann::ordered_json report_json(const Report& report);

// Parse a report back (for the `report` subcommand).
struct ReportSummary {
  std::string suite;
  std::vector<Criterion> criteria;
};
ReportSummary summarize_report_json(const nlohmann::ordered_json& j);

int resolve_workers(int requested);
std::string version_string();

// Replicate batch of peeling runs; row i is deterministic in (seed, i).
std::vector<peel::PeelingOutcome> run_peel_batch(const ExperimentConfig& cfg);
std::string peel_csv(std::span<const peel::PeelingOutcome> rows);

// CSV batches for the `ladders` subcommand.
std::string quadruples_csv(const ExperimentConfig& cfg);
std::string lambda_csv(const ExperimentConfig& cfg);
std::string joint_csv(const ExperimentConfig& cfg);

// Survival samples for the three tail criteria, with the censoring
// conventions the suites assert under (see README).
std::vector<stats::Sample> theta_samples(std::span<const peel::PeelingOutcome> rows);
std::vector<stats::Sample> perimeter_samples(std::span<const peel::PeelingOutcome> rows,
                                             double censored_value);
std::vector<stats::Sample> volume_samples(std::span<const peel::PeelingOutcome> rows,
                                          bool red, double censored_value);

}  // namespace uipt::experiments
