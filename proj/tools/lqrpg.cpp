// lqrpg: exact LQR analytics, online policy gradient runs, and the
// experiment sweeps, driven by TOML system files.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lqrpg/experiments.hpp"
#include "lqrpg/lqr_core.hpp"
#include "lqrpg/online_pg.hpp"
#include "lqrpg/report.hpp"
#include "lqrpg/simulator.hpp"
#include "lqrpg/system_io.hpp"
#include "lqrpg/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSuiteFailure = 1;
constexpr int kExitParseError = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitDiverged = 4;

struct CommonOpts {
  std::string system_path;
  long T = 100000;
  std::uint64_t seed = 1;
  std::string out_dir;
  double delta = 0.05;
  lqrpg::ScheduleOverrides overrides;
  bool quick = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_system) {
  auto* sys = cmd->add_option("--system", o.system_path, "system definition TOML file");
  if (needs_system) sys->required()->check(CLI::ExistingFile);
  cmd->add_option("--T", o.T, "horizon (steps)")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "root RNG seed");
  cmd->add_option("--out", o.out_dir, "output directory for CSV/SVG files");
  cmd->add_option("--delta", o.delta, "confidence parameter")->check(CLI::PositiveNumber);
  cmd->add_option("--eta-mult", o.overrides.eta_mult, "step-size multiplier");
  cmd->add_option("--r0-mult", o.overrides.r0_mult, "exploration-radius multiplier");
  cmd->add_option("--m0-mult", o.overrides.m0_mult, "sub-epoch-count multiplier");
  cmd->add_option("--tau-mult", o.overrides.tau_mult, "mixing-length multiplier");
  cmd->add_flag("--quick", o.quick, "reduced sample sizes");
}

std::string fmt_matrix(const lqrpg::Matrix& m) {
  std::ostringstream out;
  out << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << (i ? "; " : "");
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? " " : "") << lqrpg::fmt_num(m(i, j));
  }
  out << "]";
  return out.str();
}

lqrpg::Controller initial_controller(const lqrpg::SystemFile& file) {
  if (file.controller) return *file.controller;
  lqrpg::Controller K;
  K.K = lqrpg::Matrix::Zero(file.system.du(), file.system.dx());
  return K;
}

int cmd_solve(const CommonOpts& o) {
  const lqrpg::SystemFile file = lqrpg::load_system_file(o.system_path);
  const lqrpg::Controller K0 = initial_controller(file);
  const auto opt = lqrpg::solve_optimal(file.system);
  const auto consts = lqrpg::derive_constants(file.system, K0);
  const auto sched = lqrpg::derive_schedule(consts, o.T, o.delta, file.system.dx(),
                                              file.system.du(), file.system.noise.bound_W,
                                              o.overrides);
  std::cout << "K_star = " << fmt_matrix(opt.K.K) << "\n"
            << "J_star = " << lqrpg::fmt_num(opt.J) << "\n"
            << "kappa = " << lqrpg::fmt_num(consts.kappa) << "\n"
            << "gamma = " << lqrpg::fmt_num(consts.gamma) << "\n"
            << "D0 = " << lqrpg::fmt_num(consts.D0) << "\n"
            << "G = " << lqrpg::fmt_num(consts.G) << "\n"
            << "beta = " << lqrpg::fmt_num(consts.beta) << "\n"
            << "mu = " << lqrpg::fmt_num(consts.mu) << "\n"
            << "eta_theory = " << lqrpg::fmt_num(sched.eta_theory) << "\n"
            << "tau_theory = " << lqrpg::fmt_num(sched.tau_theory) << "\n"
            << "r0_theory = " << lqrpg::fmt_num(sched.r0_theory) << "\n"
            << "m0_theory = " << lqrpg::fmt_num(sched.m0_theory) << "\n"
            << "eta = " << lqrpg::fmt_num(sched.eta) << "\n"
            << "tau = " << sched.tau << "\n"
            << "r0 = " << lqrpg::fmt_num(sched.r0) << "\n"
            << "m0 = " << lqrpg::fmt_num(sched.m0) << "\n"
            << "rho = " << lqrpg::fmt_num(sched.rho) << "\n"
            << "theoretical_only = " << (sched.theoretical_only ? "true" : "false") << "\n";
  if (!file.system.cost_normalized())
    std::cout << "note: Q or R has eigenvalues above 1 (analysis assumes Q,R <= I)\n";
  if (!o.out_dir.empty()) {
    lqrpg::CsvWriter csv(std::filesystem::path(o.out_dir) / "solve.csv", {"field", "value"});
    csv.row({"J_star", lqrpg::fmt_num(opt.J)});
    csv.row({"kappa", lqrpg::fmt_num(consts.kappa)});
    csv.row({"gamma", lqrpg::fmt_num(consts.gamma)});
    csv.row({"D0", lqrpg::fmt_num(consts.D0)});
    csv.row({"G", lqrpg::fmt_num(consts.G)});
    csv.row({"beta", lqrpg::fmt_num(consts.beta)});
    csv.row({"mu", lqrpg::fmt_num(consts.mu)});
    csv.row({"eta", lqrpg::fmt_num(sched.eta)});
    csv.row({"tau", std::to_string(sched.tau)});
    csv.row({"r0", lqrpg::fmt_num(sched.r0)});
    csv.row({"m0", lqrpg::fmt_num(sched.m0)});
  }
  return kExitOk;
}

int cmd_rollout(const CommonOpts& o) {
  const lqrpg::SystemFile file = lqrpg::load_system_file(o.system_path);
  const lqrpg::Controller K = initial_controller(file);
  lqrpg::Rng rng(o.seed, {0x011eu});
  const auto roll = lqrpg::rollout_fixed(file.system, K, lqrpg::Vector::Zero(file.system.dx()),
                                         o.T, rng);
  double total = 0.0;
  for (double c : roll.costs) total += c;
  std::cout << "steps = " << roll.costs.size() << "\n"
            << "mean_cost = " << lqrpg::fmt_num(total / roll.costs.size()) << "\n"
            << "analytic_J = " << lqrpg::fmt_num(lqrpg::infinite_horizon_cost(file.system, K))
            << "\n";
  if (!o.out_dir.empty()) {
    std::vector<std::string> header = {"t"};
    for (Eigen::Index i = 0; i < file.system.dx(); ++i) header.push_back("x" + std::to_string(i));
    for (Eigen::Index i = 0; i < file.system.du(); ++i) header.push_back("u" + std::to_string(i));
    header.push_back("cost");
    lqrpg::CsvWriter csv(std::filesystem::path(o.out_dir) / "trajectory.csv", header);
    for (size_t t = 0; t < roll.costs.size(); ++t) {
      std::vector<std::string> row = {std::to_string(t)};
      const lqrpg::Vector& x = roll.states[t];
      const lqrpg::Vector u = K.K * x;
      for (Eigen::Index i = 0; i < x.size(); ++i) row.push_back(lqrpg::fmt_num(x(i)));
      for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(lqrpg::fmt_num(u(i)));
      row.push_back(lqrpg::fmt_num(roll.costs[t]));
      csv.row(row);
    }
  }
  return kExitOk;
}

int cmd_learn(const CommonOpts& o) {
  const lqrpg::SystemFile file = lqrpg::load_system_file(o.system_path);
  const lqrpg::Controller K0 = initial_controller(file);
  const auto consts = lqrpg::derive_constants(file.system, K0);
  const auto sched = lqrpg::derive_schedule(consts, o.T, o.delta, file.system.dx(),
                                              file.system.du(), file.system.noise.bound_W,
                                              o.overrides);
  const double eta_cap =
      std::min({1.0 / consts.beta, 4.0 / consts.mu, consts.D0 / (2.0 * consts.G)});
  if (sched.eta > eta_cap)
    std::cout << "warning: eta " << lqrpg::fmt_num(sched.eta)
              << " exceeds the convergence precondition cap " << lqrpg::fmt_num(eta_cap)
              << "; run proceeds\n";
  if (sched.theoretical_only)
    std::cout << "warning: schedule cannot finish one epoch within T; consider overrides\n";
  if (sched.r0_exceeds_D0)
    std::cout << "warning: r0 " << lqrpg::fmt_num(sched.r0)
              << " exceeds the admissibility radius D0 " << lqrpg::fmt_num(sched.D0)
              << "; run proceeds\n";

  lqrpg::Rng rng(o.seed, {0x1ea51u});
  const lqrpg::RegretTrace trace = lqrpg::run(file.system, K0, sched, o.T, rng);
  if (trace.k0_warning) std::cout << "warning: J(K0) > nu/4\n";

  if (!o.out_dir.empty()) {
    lqrpg::write_trace_csv(std::filesystem::path(o.out_dir) / "trace.csv", trace);
    lqrpg::write_epochs_csv(std::filesystem::path(o.out_dir) / "epochs.csv", trace);
  }
  const double J_last = lqrpg::infinite_horizon_cost(file.system, lqrpg::Controller{trace.K_final});
  std::cout << "steps = " << trace.costs.size() << "\n"
            << "epochs = " << trace.epochs.size() << "\n"
            << "regret = " << lqrpg::fmt_num(lqrpg::regret(trace)) << "\n"
            << "J_star = " << lqrpg::fmt_num(trace.J_star) << "\n"
            << "J_final_gap = " << lqrpg::fmt_num(J_last - trace.J_star) << "\n"
            << "diverged = " << (trace.diverged ? "true" : "false") << "\n";
  if (trace.diverged) {
    std::cout << "divergence: " << trace.divergence_reason << "\n";
    return kExitDiverged;
  }
  return kExitOk;
}

int cmd_sweep(const CommonOpts& o, const std::vector<long>& t_grid, int seeds) {
  const lqrpg::SystemFile file = lqrpg::load_system_file(o.system_path);
  lqrpg::Benchmark bench{"sweep", file.system, initial_controller(file)};

  lqrpg::SweepConfig cfg;
  cfg.horizons = t_grid;
  cfg.seeds = seeds;
  cfg.overrides = o.overrides;
  cfg.delta = o.delta;
  cfg.base_seed = o.seed;
  const auto learner = lqrpg::regret_scaling(bench, cfg);
  const auto baseline = lqrpg::fixed_controller_scaling(bench, bench.K0, cfg);

  std::cout << "learner_slope = " << lqrpg::fmt_num(learner.fit.slope) << " (se "
            << lqrpg::fmt_num(learner.fit.slope_se) << ")\n"
            << "fixed_slope = " << lqrpg::fmt_num(baseline.fit.slope) << "\n"
            << "diverged = " << learner.diverged << "/" << learner.total_runs << "\n";
  if (!o.out_dir.empty())
    lqrpg::write_regret_scaling_report(o.out_dir, cfg, learner, &baseline);
  if (learner.diverged * 5 > learner.total_runs) {
    std::cout << "failure: more than 20% of runs diverged (miscalibrated overrides)\n";
    return kExitSuiteFailure;
  }
  return kExitOk;
}

int cmd_validate(const CommonOpts& o) {
  const auto results = lqrpg::run_validation(o.quick, o.seed);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  " << r.detail << "\n";
    all = all && r.passed;
  }
  if (!o.out_dir.empty()) {
    lqrpg::CsvWriter csv(std::filesystem::path(o.out_dir) / "validate.csv",
                         {"suite", "passed", "detail"});
    for (const auto& r : results)
      csv.row({r.name, r.passed ? "1" : "0", "\"" + r.detail + "\""});
  }
  return all ? kExitOk : kExitSuiteFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model-free online policy gradient for LQR"};
  app.require_subcommand(1);

  CommonOpts o;
  std::vector<long> t_grid = {16000, 32000, 64000, 128000, 256000, 512000};
  int seeds = 10;

  auto* solve = app.add_subcommand("solve", "optimal controller, constants, and schedule");
  add_common(solve, o, true);
  auto* rollout = app.add_subcommand("rollout", "simulate a fixed controller");
  add_common(rollout, o, true);
  auto* learn = app.add_subcommand("learn", "run one online policy gradient trajectory");
  add_common(learn, o, true);
  auto* sweep = app.add_subcommand("sweep", "regret scaling across horizons");
  add_common(sweep, o, true);
  sweep->add_option("--T-grid", t_grid, "horizons for the sweep");
  sweep->add_option("--seeds", seeds, "seeds per horizon")->check(CLI::PositiveNumber);
  auto* validate = app.add_subcommand("validate", "run all invariant suites");
  add_common(validate, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitParseError;
  }

  try {
    if (solve->parsed()) return cmd_solve(o);
    if (rollout->parsed()) return cmd_rollout(o);
    if (learn->parsed()) return cmd_learn(o);
    if (sweep->parsed()) return cmd_sweep(o, t_grid, seeds);
    if (validate->parsed()) return cmd_validate(o);
  } catch (const lqrpg::toml::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const lqrpg::InvalidArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const lqrpg::NoConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSuiteFailure;
  }
  return kExitOk;
}
