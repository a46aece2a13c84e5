#pragma once

#include <string>
#include <vector>

#include "lqrpg/experiments.hpp"
#include "lqrpg/lqr_core.hpp"

namespace lqrpg {

// Central finite differences of the infinite-horizon cost; independent of
// the closed-form gradient path.
inline Matrix fd_policy_gradient(const LqrSystem& sys, const Controller& K, double h = 1e-5) {
  Matrix g(sys.du(), sys.dx());
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      Controller plus = K, minus = K;
      plus.K(i, j) += h;
      minus.K(i, j) -= h;
      g(i, j) =
          (infinite_horizon_cost(sys, plus) - infinite_horizon_cost(sys, minus)) / (2.0 * h);
    }
  return g;
}

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline SuiteResult suite_lyapunov_residuals(int n_systems, std::uint64_t seed) {
  SuiteResult res{"lyapunov_residuals"};
  double worst_residual = 0.0, worst_dual = 0.0;
  Rng rng(seed, {1u});
  for (int s = 0; s < n_systems; ++s) {
    Rng sub = rng.substream(s);
    const LqrSystem sys = make_random_stable_system(1 + s % 4, 1 + (s / 2) % 4, sub);
    const Controller K{Matrix::Zero(sys.du(), sys.dx())};
    const SteadyStateSolution ss = steady_state(sys, K);
    const Matrix M = sys.A + sys.B * K.K;
    worst_residual = std::max(
        worst_residual,
        (ss.Sigma - sys.noise.covariance - M * ss.Sigma * M.transpose()).norm());
    worst_residual = std::max(
        worst_residual,
        (ss.P - sys.Q - K.K.transpose() * sys.R * K.K - M.transpose() * ss.P * M).norm());
    const double j_p = (ss.P * sys.noise.covariance).trace();
    const double j_sigma = ((sys.Q + K.K.transpose() * sys.R * K.K) * ss.Sigma).trace();
    worst_dual = std::max(worst_dual, std::abs(j_p - j_sigma) / std::abs(j_p));
  }
  res.passed = worst_residual <= 1e-10 && worst_dual <= 1e-10;
  res.detail = "worst residual " + fmt_num(worst_residual) + ", worst dual-cost gap " +
               fmt_num(worst_dual);
  return res;
}

inline SuiteResult suite_gradient_fidelity(int n_systems, std::uint64_t seed) {
  SuiteResult res{"gradient_fidelity"};
  double worst = 0.0;
  Rng rng(seed, {2u});
  for (int s = 0; s < n_systems; ++s) {
    Rng sub = rng.substream(s);
    const LqrSystem sys = make_random_stable_system(1 + s % 4, 1 + (s / 3) % 4, sub);
    const Controller K{Matrix::Zero(sys.du(), sys.dx())};
    const Matrix exact = exact_policy_gradient(sys, K);
    const Matrix fd = fd_policy_gradient(sys, K);
    worst = std::max(worst, (exact - fd).norm() / std::max(1e-12, fd.norm()));
  }
  res.passed = worst <= 1e-4;
  res.detail = "worst relative error " + fmt_num(worst) + " over " + std::to_string(n_systems) +
               " systems";
  return res;
}

inline SuiteResult suite_corrupted_gd_zoo(long steps, std::uint64_t seed) {
  SuiteResult res{"corrupted_gd_zoo"};
  Rng rng(seed, {3u});
  const BoundSuiteResult r = corrupted_gd_bound_suite(make_pl_zoo(), steps, rng);
  res.passed = r.violations == 0 && r.checks > 0;
  res.detail = std::to_string(r.violations) + " violations in " + std::to_string(r.checks) +
               " checks";
  if (!r.failures.empty()) res.detail += " (first: " + r.failures.front() + ")";
  return res;
}

inline SuiteResult suite_exploration_exponent(bool quick, std::uint64_t seed) {
  SuiteResult res{"exploration_exponent"};
  res.passed = true;
  const int m = quick ? 100 : 400;
  auto benches = benchmark_suite();
  if (quick) benches.resize(1);
  for (size_t bi = 0; bi < benches.size(); ++bi) {
    const auto& b = benches[bi];
    const auto r_grid = exploration_radius_grid(derive_constants(b.system, b.K0).D0);
    Rng rng(seed, {4u, bi});
    const auto r = exploration_cost_scaling(b.system, b.K0, r_grid, m, 20, rng);
    res.detail += b.name + ": " + fmt_num(r.direct_fit.slope) + " ";
    if (!(r.direct_fit.slope >= 1.7 && r.direct_fit.slope <= 2.3)) res.passed = false;
  }
  return res;
}

inline SuiteResult suite_one_point_estimator(bool quick, std::uint64_t seed) {
  SuiteResult res{"one_point_estimator"};
  Rng rng(seed, {5u});
  const auto study =
      one_point_quadratic_study(rng, quick ? 100000 : 1000000, quick ? 10 : 30);
  const double err_cap = quick ? 0.16 : 0.05;
  res.passed = study.err_large_m <= err_cap && study.exponent >= -0.6 && study.exponent <= -0.4;
  res.detail = "err@large_m " + fmt_num(study.err_large_m) + ", decay exponent " +
               fmt_num(study.exponent);
  return res;
}

inline std::vector<SuiteResult> run_validation(bool quick, std::uint64_t seed) {
  std::vector<SuiteResult> out;
  out.push_back(suite_lyapunov_residuals(quick ? 10 : 50, seed));
  out.push_back(suite_gradient_fidelity(quick ? 10 : 50, seed));
  out.push_back(suite_corrupted_gd_zoo(quick ? 2000 : 10000, seed));
  out.push_back(suite_exploration_exponent(quick, seed));
  out.push_back(suite_one_point_estimator(quick, seed));
  return out;
}

}  // namespace lqrpg
