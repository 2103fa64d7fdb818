// Command-line front door: exact-law dumps, peeling batches, tail suites,
// the distributional-identity suite, ladder-walk batches and report viewing.
//
// Exit codes: 0 success (all assertions passing), 1 criterion failure,
// 2 usage error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "uipt/experiments.hpp"
#include "uipt/laws.hpp"

namespace {

namespace ex = uipt::experiments;

struct RangeSpec {
  std::int64_t lo = 0, hi = 0;
};

RangeSpec parse_range(const std::string& text) {
  const auto pos = text.find("..");
  if (pos == std::string::npos)
    throw CLI::ValidationError("--range", "expected A..B");
  RangeSpec r;
  try {
    r.lo = std::stoll(text.substr(0, pos));
    r.hi = std::stoll(text.substr(pos + 2));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--range", "expected integer endpoints");
  }
  if (r.lo > r.hi) throw CLI::ValidationError("--range", "A must be <= B");
  return r;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << content;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int emit_report(const ex::Report& rep, const std::string& out_prefix) {
  const auto j = ex::report_json(rep);
  const std::string json_text = j.dump(2) + "\n";
  if (out_prefix.empty()) {
    std::fwrite(json_text.data(), 1, json_text.size(), stdout);
  } else {
    write_output(out_prefix + ".json", json_text);
    write_output(out_prefix + ".csv", rep.data_csv);
  }
  int failed = 0;
  for (const auto& c : rep.criteria) {
    if (!c.pass) ++failed;
    std::fprintf(stderr, "[%s] %s value=%.6g target=%.6g tol=%.6g\n",
                 c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.target,
                 c.tolerance);
  }
  std::fprintf(stderr, "suite %s: %zu criteria, %d failed (%.1fs)\n",
               rep.suite.c_str(), rep.criteria.size(), failed, rep.wall_seconds);
  return failed == 0 ? 0 : 1;
}

std::string laws_csv(const std::string& pmf, RangeSpec range, std::int64_t n,
                     std::int64_t d) {
  std::string out = "arg,value\n";
  for (std::int64_t a = range.lo; a <= range.hi; ++a) {
    double v;
    if (pmf == "step") v = uipt::laws::step_pmf(a);
    else if (pmf == "step_tail") v = uipt::laws::step_tail(a);
    else if (pmf == "harmonic") v = uipt::laws::harmonic_h(a);
    else if (pmf == "kernel") v = uipt::laws::kernel_pmf(n, a);
    else if (pmf == "boltzmann") v = uipt::laws::boltzmann_volume_pmf(d, a);
    else if (pmf == "ladder_height") v = uipt::laws::ladder_height_pmf(a);
    else if (pmf == "ladder_jump") v = uipt::laws::ladder_jump_pmf(a);
    else if (pmf == "lambda") v = uipt::laws::lambda_pmf(a);
    else throw std::runtime_error("unknown pmf: " + pmf);
    out += std::to_string(a) + ',' + fmt17(v) + '\n';
  }
  return out;
}

void add_common_flags(CLI::App* cmd, ex::ExperimentConfig* cfg) {
  cmd->add_option("--replicates", cfg->replicates, "Number of replicates");
  cmd->add_option("--seed", cfg->master_seed, "Master seed");
  cmd->add_option("--workers", cfg->workers,
                  "Worker threads (0 = UIPT_PEEL_WORKERS env or hardware)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peeling-process Monte Carlo for critical site percolation on "
               "random triangulations: exact laws, tail-exponent suites and "
               "distributional-identity checks"};
  app.set_config("--config", "", "key=value file; command-line flags override it");
  app.require_subcommand(1);

  // laws ---------------------------------------------------------------
  auto* laws_cmd = app.add_subcommand("laws", "Dump exact pmfs/kernel rows as CSV, or run the self-check suite");
  std::string pmf_name = "step";
  std::string range_text = "1..1";
  std::int64_t kernel_n = 2, boltz_d = 2;
  bool selfcheck = false;
  std::string laws_out;
  laws_cmd->add_option("--pmf", pmf_name,
                       "One of: step, step_tail, harmonic, kernel, boltzmann, "
                       "ladder_height, ladder_jump, lambda")
      ->check(CLI::IsMember({"step", "step_tail", "harmonic", "kernel",
                             "boltzmann", "ladder_height", "ladder_jump",
                             "lambda"}));
  laws_cmd->add_option("--range", range_text, "Argument range A..B (inclusive)");
  laws_cmd->add_option("--n", kernel_n, "Kernel row (boundary size), for --pmf kernel");
  laws_cmd->add_option("--d", boltz_d, "Polygon size, for --pmf boltzmann");
  laws_cmd->add_flag("--selfcheck", selfcheck, "Run the exact-law self-check suite (JSON report)");
  laws_cmd->add_option("--out", laws_out, "Output file (default stdout)");

  // peel ---------------------------------------------------------------
  auto* peel_cmd = app.add_subcommand("peel", "Run peeling replicates to theta; one CSV row per replicate");
  ex::ExperimentConfig peel_cfg;
  peel_cfg.replicates = 1000;
  peel_cfg.track_volume = true;
  std::string start_text = "1,1";
  std::string root_coloring = "fixed";
  std::string peel_out;
  bool peel_no_volumes = false;
  add_common_flags(peel_cmd, &peel_cfg);
  peel_cmd->add_option("--step-cap", peel_cfg.step_cap, "Censor a run after this many steps");
  peel_cmd->add_option("--volume-cap", peel_cfg.volume_cap, "Censor a run past this total volume");
  peel_cmd->add_option("--start", start_text, "Initial boundary r0,b0");
  peel_cmd->add_option("--root-coloring", root_coloring,
                       "fixed: start exactly at --start; random: start (2,0) "
                       "with probability 1/2, else (1,1)")
      ->check(CLI::IsMember({"fixed", "random"}));
  peel_cmd->add_flag("--no-volumes", peel_no_volumes, "Skip volume sampling");
  peel_cmd->add_option("--out", peel_out, "Output file (default stdout)");

  // tails ----------------------------------------------------------------
  auto* tails_cmd = app.add_subcommand("tails", "Tail-exponent suites (JSON report + survival CSV)");
  std::string suite_name = "theta";
  std::string tails_out;
  std::optional<std::int64_t> t_reps, t_stepcap, t_fitlo, t_fithi;
  std::optional<std::uint64_t> t_seed, t_volcap;
  std::optional<double> t_base, t_ratio;
  std::optional<int> t_count, t_workers;
  tails_cmd->add_option("--suite", suite_name, "theta, volume, or perimeter")
      ->check(CLI::IsMember({"theta", "volume", "perimeter"}));
  tails_cmd->add_option("--replicates", t_reps, "Number of replicates");
  tails_cmd->add_option("--seed", t_seed, "Master seed");
  tails_cmd->add_option("--step-cap", t_stepcap, "Step cap");
  tails_cmd->add_option("--volume-cap", t_volcap, "Volume cap");
  tails_cmd->add_option("--grid-base", t_base, "First survival grid point");
  tails_cmd->add_option("--grid-ratio", t_ratio, "Geometric grid ratio");
  tails_cmd->add_option("--grid-count", t_count, "Number of grid points");
  tails_cmd->add_option("--fit-lo", t_fitlo, "First grid index of the fit range");
  tails_cmd->add_option("--fit-hi", t_fithi, "Last grid index of the fit range (-1 = last)");
  tails_cmd->add_option("--workers", t_workers, "Worker threads");
  tails_cmd->add_option("--out", tails_out, "Output prefix (PREFIX.json, PREFIX.csv); default JSON to stdout");

  // identities -----------------------------------------------------------
  auto* ident_cmd = app.add_subcommand("identities", "Ladder, Sparre-Andersen, Vysotsky, annealed-volume and Harris checks");
  ex::ExperimentConfig ident_cfg = ex::default_config("identities");
  std::string ident_out;
  add_common_flags(ident_cmd, &ident_cfg);
  ident_cmd->add_option("--asc-replicates", ident_cfg.asc_replicates, "Ascending-leg sample size");
  ident_cmd->add_option("--annealed-draws", ident_cfg.annealed_draws, "Annealed volume draws");
  ident_cmd->add_option("--harris-walks", ident_cfg.harris_walks, "Walks for the Harris check");
  ident_cmd->add_option("--quad-leg-cap", ident_cfg.quad_leg_cap, "Jump budget per quadruple leg (over-budget atoms are redrawn)");
  ident_cmd->add_option("--lambda-leg-cap", ident_cfg.lambda_leg_cap, "Jump budget per Lambda-run leg");
  ident_cmd->add_option("--out", ident_out, "Output prefix; default JSON to stdout");

  // ladders ----------------------------------------------------------------
  auto* lad_cmd = app.add_subcommand("ladders", "Ladder-walk batches; CSV per mode");
  ex::ExperimentConfig lad_cfg;
  lad_cfg.replicates = 1000;
  lad_cfg.track_volume = true;
  std::string lad_mode = "quadruples";
  std::string lad_out;
  bool lad_no_volumes = false;
  add_common_flags(lad_cmd, &lad_cfg);
  lad_cmd->add_option("--mode", lad_mode,
                      "quadruples: replicate,T,U,H,Vb,Vr; lambda: replicate,"
                      "lambda,censored,t_sum,u_sum,v_sum (lambda=0 when "
                      "censored at --k-cap); joint: replicate,theta_hat,"
                      "theta_resolved,ladders,flagged,checks,violations")
      ->check(CLI::IsMember({"quadruples", "lambda", "joint"}));
  lad_cmd->add_option("--leg-cap", lad_cfg.quad_leg_cap,
                      "Jump budget per leg; atoms over budget are redrawn, so "
                      "samples follow the budget-conditioned law");
  lad_cmd->add_option("--k-cap", lad_cfg.lambda_k_cap, "Quadruple budget per Lambda run");
  lad_cmd->add_flag("--no-volumes", lad_no_volumes, "Skip volume sampling");
  lad_cmd->add_option("--out", lad_out, "Output file (default stdout)");

  // report -----------------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "Summarize a JSON report; exit 1 if any criterion failed");
  std::string report_path;
  report_cmd->add_option("file", report_path, "Report JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (laws_cmd->parsed()) {
      if (selfcheck) {
        auto rep = ex::run_suite(ex::default_config("laws_selfcheck"), "laws_selfcheck");
        return emit_report(rep, laws_out);
      }
      write_output(laws_out, laws_csv(pmf_name, parse_range(range_text), kernel_n, boltz_d));
      return 0;
    }
    if (peel_cmd->parsed()) {
      const auto comma = start_text.find(',');
      if (comma == std::string::npos) {
        std::fprintf(stderr, "error: --start expects r0,b0\n");
        return 2;
      }
      peel_cfg.r0 = std::stoll(start_text.substr(0, comma));
      peel_cfg.b0 = std::stoll(start_text.substr(comma + 1));
      peel_cfg.root_coloring_random = root_coloring == "random";
      peel_cfg.track_volume = !peel_no_volumes;
      const auto rows = ex::run_peel_batch(peel_cfg);
      write_output(peel_out, ex::peel_csv(rows));
      return 0;
    }
    if (tails_cmd->parsed()) {
      const std::string suite_id = suite_name + "_tails";
      ex::ExperimentConfig cfg = ex::default_config(suite_id);
      if (t_reps) cfg.replicates = *t_reps;
      if (t_seed) cfg.master_seed = *t_seed;
      if (t_stepcap) cfg.step_cap = *t_stepcap;
      if (t_volcap) cfg.volume_cap = *t_volcap;
      if (t_base) cfg.grid.base = *t_base;
      if (t_ratio) cfg.grid.ratio = *t_ratio;
      if (t_count) cfg.grid.count = *t_count;
      if (t_fitlo) cfg.fit_lo = static_cast<int>(*t_fitlo);
      if (t_fithi) cfg.fit_hi = static_cast<int>(*t_fithi);
      if (t_workers) cfg.workers = *t_workers;
      return emit_report(ex::run_suite(cfg, suite_id), tails_out);
    }
    if (ident_cmd->parsed()) {
      return emit_report(ex::run_suite(ident_cfg, "identities"), ident_out);
    }
    if (lad_cmd->parsed()) {
      lad_cfg.track_volume = !lad_no_volumes;
      lad_cfg.lambda_leg_cap = lad_cfg.quad_leg_cap;
      std::string csv;
      if (lad_mode == "quadruples") csv = ex::quadruples_csv(lad_cfg);
      else if (lad_mode == "lambda") csv = ex::lambda_csv(lad_cfg);
      else csv = ex::joint_csv(lad_cfg);
      write_output(lad_out, csv);
      return 0;
    }
    if (report_cmd->parsed()) {
      std::ifstream in(report_path);
      if (!in) {
        std::fprintf(stderr, "error: cannot open %s\n", report_path.c_str());
        return 2;
      }
      const auto j = nlohmann::ordered_json::parse(in);
      const auto summary = ex::summarize_report_json(j);
      int failed = 0;
      std::printf("suite: %s\n", summary.suite.c_str());
      for (const auto& c : summary.criteria) {
        if (!c.pass) ++failed;
        std::printf("  [%s] %-32s value=%-12.6g target=%-12.6g tol=%.6g\n",
                    c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.target,
                    c.tolerance);
      }
      std::printf("%d of %zu criteria failed\n", failed, summary.criteria.size());
      return failed == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
