// Acceptance gate: one check per release criterion, one PASS/FAIL line each.
// Exits nonzero if any criterion fails. argv[1] (optional) is the CLI binary,
// argv[2] the directory with the shipped system files; both are needed only
// for the reproducibility criterion.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lqrpg/experiments.hpp"
#include "lqrpg/online_pg.hpp"
#include "lqrpg/simulator.hpp"
#include "lqrpg/validate.hpp"

using namespace lqrpg;

namespace {

int failures = 0;

void report(int idx, bool passed, const std::string& detail) {
  std::printf("criterion %2d %s  %s\n", idx, passed ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!passed) ++failures;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. exact policy gradient vs central finite differences, 50 random systems
void criterion_gradient_fidelity() {
  const SuiteResult r = suite_gradient_fidelity(50, 1);
  report(1, r.passed, "gradient vs finite differences: " + r.detail);
}

// 2. Bellman/Lyapunov residuals and the two cost formulas
void criterion_dual_cost() {
  const SuiteResult r = suite_lyapunov_residuals(50, 1);
  report(2, r.passed, "steady-state residuals: " + r.detail);
}

// 3. optimality of the Riccati controller + scalar closed form
void criterion_optimality() {
  bool passed = true;
  std::string detail;
  double worst_grad = 0.0;
  Rng rng(2);
  for (int s = 0; s < 50 && passed; ++s) {
    Rng sub = rng.substream(s);
    const LqrSystem sys = make_random_stable_system(1 + s % 4, 1 + (s / 2) % 4, sub);
    const OptimalSolution opt = solve_optimal(sys);
    worst_grad = std::max(worst_grad, exact_policy_gradient(sys, opt.K).norm());
    if (worst_grad > 1e-8) {
      passed = false;
      detail = "gradient at optimum " + fmt_num(worst_grad);
      break;
    }
    for (int i = 0; i < 100; ++i) {
      const Matrix delta = 0.01 * sample_sphere(sys.du(), sys.dx(), sub);
      if (infinite_horizon_cost(sys, Controller{opt.K.K + delta}) < opt.J - 1e-10) {
        passed = false;
        detail = "perturbation beats the optimum on system " + std::to_string(s);
        break;
      }
    }
  }
  const OptimalSolution scalar = solve_optimal(scalar_benchmark().system);
  const double p_star = (0.25 + std::sqrt(4.0625)) / 2.0;
  if (std::abs(scalar.P(0, 0) - 1.132782) > 1e-5 ||
      std::abs(scalar.K.K(0, 0) + 0.265564) > 1e-5 ||
      std::abs(scalar.P(0, 0) - p_star) > 1e-9) {
    passed = false;
    detail = "scalar closed form mismatch";
  }
  if (passed)
    detail = "worst gradient at optimum " + fmt_num(worst_grad) +
             ", 5000 perturbation probes, scalar p*/K* reproduced";
  report(3, passed, detail);
}

// 4. convergence bound for gradient descent under corrupted oracles
void criterion_bound_suite() {
  Rng rng(3);
  const BoundSuiteResult r = corrupted_gd_bound_suite(make_pl_zoo(), 10000, rng);
  report(4, r.violations == 0 && r.checks > 0,
         std::to_string(r.violations) + " violations in " + std::to_string(r.checks) +
             " bound checks (" + std::to_string(r.out_of_contract) + " out of contract)" +
             (r.failures.empty() ? "" : "; first: " + r.failures.front()));
}

// 5. one-point estimator accuracy and 1/sqrt(m) decay on exact quadratics
void criterion_one_point() {
  Rng rng(4);
  const OnePointQuadraticStudy s = one_point_quadratic_study(rng);
  const bool passed =
      s.err_large_m <= 0.05 && s.exponent >= -0.6 && s.exponent <= -0.4;
  report(5, passed,
         "error at m=1e6: " + fmt_num(s.err_large_m) + ", decay exponent " +
             fmt_num(s.exponent));
}

// 6. quadratic growth of the exploration cost in the radius
void criterion_exploration() {
  bool passed = true;
  std::string detail = "fitted exponents:";
  const auto benches = benchmark_suite();
  for (size_t bi = 0; bi < benches.size(); ++bi) {
    const auto r_grid =
        exploration_radius_grid(derive_constants(benches[bi].system, benches[bi].K0).D0);
    Rng rng(5, {bi});
    const auto r = exploration_cost_scaling(benches[bi].system, benches[bi].K0, r_grid, 400, 20,
                                            rng);
    detail += " " + benches[bi].name + "=" + fmt_num(r.direct_fit.slope);
    if (!(r.direct_fit.slope >= 1.7 && r.direct_fit.slope <= 2.3)) passed = false;
  }
  report(6, passed, detail);
}

// 7. covariance mixing within the strong-stability envelope
void criterion_mixing() {
  bool passed = true;
  long checked = 0;
  double worst_margin = 1e300;
  Rng rng(6);
  for (int s = 0; s < 20; ++s) {
    Rng sub = rng.substream(s);
    const LqrSystem sys = make_random_stable_system(1 + s % 3, 1 + s % 2, sub);
    const Controller K{Matrix::Zero(sys.du(), sys.dx())};
    const RegularityConstants c = derive_constants(sys, K);
    const Matrix M = sys.A + sys.B * K.K;
    const Matrix Sigma_K = solve_sigma(sys, K);
    const Matrix x0 = 2.0 * Matrix::Ones(sys.dx(), 1);
    Matrix S = x0 * x0.transpose();
    const double base = (S - Sigma_K).norm();
    for (int t = 1; t <= 300; ++t) {
      S = sys.noise.covariance + M * S * M.transpose();
      const double envelope = c.kappa * c.kappa * std::exp(-2.0 * c.gamma * t) * base;
      worst_margin = std::min(worst_margin, envelope - (S - Sigma_K).norm());
      if ((S - Sigma_K).norm() > envelope + 1e-12) passed = false;
      ++checked;
    }
  }
  report(7, passed,
         std::to_string(checked) + " envelope checks on 20 controllers, tightest margin " +
             fmt_num(worst_margin));
}

// 8. desk-scale regret growth ~ sqrt(T), clearly below the fixed-controller line
void criterion_regret_scaling() {
  Benchmark b = scalar_benchmark();
  const RegularityConstants c = derive_constants(b.system, b.K0);
  SweepConfig cfg;
  cfg.horizons = {16000, 32000, 64000, 128000, 256000, 512000};
  cfg.seeds = 10;
  cfg.overrides = scalar_desk_overrides(c);
  const RegretScalingResult learner = regret_scaling(b, cfg);
  const RegretScalingResult fixed = fixed_controller_scaling(b, b.K0, cfg);
  const bool slope_ok = learner.fit.slope >= 0.40 && learner.fit.slope <= 0.75;
  const bool separated = fixed.fit.slope - learner.fit.slope >= 0.2;
  report(8, slope_ok && separated && learner.diverged * 5 <= learner.total_runs,
         "learner slope " + fmt_num(learner.fit.slope) + " (se " +
             fmt_num(learner.fit.slope_se) + "), fixed slope " + fmt_num(fixed.fit.slope) +
             ", diverged " + std::to_string(learner.diverged) + "/" +
             std::to_string(learner.total_runs));
}

// 9. truncated-Gaussian reduction: sampler moments and the worked constants
void criterion_truncation() {
  const TruncationParams p = truncation_params(Matrix::Identity(2, 2), 1000.0, 0.01);
  bool passed = std::abs(p.W_bound - 10.7298) <= 1e-4 * 10.7298 &&
                std::abs(p.sigma_sq_eff - 0.994523) <= 1e-4;
  const NoiseModel model = truncated_gaussian_for_horizon(Matrix::Identity(2, 2), 1000.0, 0.01);
  const NoiseSampler sampler(model);
  Rng rng(7);
  Vector mean = Vector::Zero(2);
  Matrix cov = Matrix::Zero(2, 2);
  const long n = 1000000;
  for (long i = 0; i < n; ++i) {
    const Vector w = sampler.draw(rng);
    mean += w;
    cov += w * w.transpose();
  }
  mean /= static_cast<double>(n);
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const double lmin = es.eigenvalues().minCoeff();
  passed = passed && mean.norm() <= 0.005 && lmin >= p.sigma_sq_eff;
  report(9, passed,
         "W " + fmt_num(p.W_bound) + ", sigma_sq_eff " + fmt_num(p.sigma_sq_eff) +
             ", empirical mean norm " + fmt_num(mean.norm()) + ", lambda_min " + fmt_num(lmin));
}

// 10. byte-identical CSVs for repeated fixed-seed CLI runs
void criterion_reproducibility(const char* cli, const char* systems_dir) {
  if (!cli || !systems_dir) {
    report(10, false, "CLI path and systems directory not provided");
    return;
  }
  const auto tmp = std::filesystem::temp_directory_path() / "lqrpg_acceptance";
  std::filesystem::remove_all(tmp);
  std::filesystem::create_directories(tmp);
  const std::string scalar = std::string(systems_dir) + "/scalar.toml";

  Benchmark b = scalar_benchmark();
  const RegularityConstants c = derive_constants(b.system, b.K0);
  const ScheduleOverrides ov = scalar_desk_overrides(c);
  char ovbuf[256];
  std::snprintf(ovbuf, sizeof(ovbuf),
                "--eta-mult %.17g --r0-mult %.17g --m0-mult %.17g --tau-mult %.17g",
                ov.eta_mult, ov.r0_mult, ov.m0_mult, ov.tau_mult);

  bool passed = true;
  std::string detail;
  for (const char* tag : {"a", "b"}) {
    const std::string out = (tmp / tag).string();
    const std::string validate_cmd = std::string(cli) + " validate --quick --seed 1 --out " +
                                     out + " > " + out + "_validate.log 2>&1";
    const std::string sweep_cmd = std::string(cli) + " sweep --system " + scalar +
                                  " --T-grid 2000 4000 --seeds 2 --seed 1 " + ovbuf + " --out " +
                                  out + " > " + out + "_sweep.log 2>&1";
    if (std::system(validate_cmd.c_str()) != 0) {
      passed = false;
      detail = "validate run failed (" + slurp(tmp / (std::string(tag) + "_validate.log")) + ")";
      break;
    }
    if (std::system(sweep_cmd.c_str()) != 0) {
      passed = false;
      detail = "sweep run failed (" + slurp(tmp / (std::string(tag) + "_sweep.log")) + ")";
      break;
    }
  }
  if (passed) {
    for (const char* f :
         {"validate.csv", "regret_scaling.csv", "regret_scaling_fit.csv", "regret_scaling.svg"}) {
      const std::string va = slurp(tmp / "a" / f), vb = slurp(tmp / "b" / f);
      if (va.empty() || va != vb) {
        passed = false;
        detail = std::string(f) + " differs between identical runs";
        break;
      }
    }
  }
  if (passed) detail = "validate + sweep artifacts byte-identical across repeated runs";
  std::filesystem::remove_all(tmp);
  report(10, passed, detail);
}

}  // namespace

int main(int argc, char** argv) {
  criterion_gradient_fidelity();
  criterion_dual_cost();
  criterion_optimality();
  criterion_bound_suite();
  criterion_one_point();
  criterion_exploration();
  criterion_mixing();
  criterion_regret_scaling();
  criterion_truncation();
  criterion_reproducibility(argc > 1 ? argv[1] : nullptr, argc > 2 ? argv[2] : nullptr);
  std::printf("%s (%d/10)\n", failures == 0 ? "ALL CRITERIA PASS" : "CRITERIA FAILED",
              10 - failures);
  return failures == 0 ? 0 : 1;
}
