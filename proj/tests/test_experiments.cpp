#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lqrpg/experiments.hpp"
#include "lqrpg/validate.hpp"

using namespace lqrpg;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("log-log fit recovers a known power law") {
  std::vector<double> xs, ys;
  for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    xs.push_back(x);
    ys.push_back(3.0 * x * x);
  }
  const ScalingFit fit = fit_loglog(xs, ys);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::pow(10.0, fit.intercept) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_loglog({1.0}, {1.0}), InvalidArgumentError);
}

TEST_CASE("bootstrap slope error is positive and small for tight data") {
  Rng rng(1);
  std::vector<double> xs = {10.0, 100.0, 1000.0};
  std::vector<std::vector<double>> samples(3);
  for (size_t i = 0; i < 3; ++i)
    for (int k = 0; k < 20; ++k)
      samples[i].push_back(xs[i] * (1.0 + 0.01 * (rng.uniform() - 0.5)));
  const double se = bootstrap_slope_se(xs, samples, 100, rng);
  CHECK(se > 0.0);
  CHECK(se < 0.05);
}

TEST_CASE("PL zoo objectives satisfy their declared constants") {
  const auto zoo = make_pl_zoo();
  REQUIRE(zoo.size() >= 6);
  Rng rng(2);
  for (const auto& o : zoo) {
    // PL inequality ||grad||^2 >= 2 mu (f - f*) on random probes in the basin
    for (int i = 0; i < 200; ++i) {
      Matrix x = o.x0;
      for (Eigen::Index d = 0; d < o.dim; ++d) x(d, 0) += rng.gaussian();
      const double gap = o.f(x) - o.f_star;
      REQUIRE(o.grad(x).squaredNorm() >= 2.0 * o.mu * gap - 1e-9);
      // beta-smoothness along the segment from x0
      const Matrix g0 = o.grad(o.x0);
      REQUIRE((o.grad(x) - g0).norm() <= o.beta * (x - o.x0).norm() + 1e-9);
    }
    CHECK(o.f(o.x0) < o.f_bar);
  }
}

TEST_CASE("bound suite: zero violations in contract, out-of-contract is skipped") {
  Rng rng(3);
  const auto zoo = make_pl_zoo();
  const BoundSuiteResult ok = corrupted_gd_bound_suite(zoo, 2000, rng);
  CHECK(ok.checks > 0);
  CHECK(ok.violations == 0);
  CHECK(ok.out_of_contract == 0);

  Rng rng2(4);
  const BoundSuiteResult skip = corrupted_gd_bound_suite(zoo, 100, rng2, 1.5);
  CHECK(skip.out_of_contract == static_cast<long>(zoo.size()) * 3);  // all non-zero patterns
  CHECK(skip.violations == 0);
}

TEST_CASE("exploration cost grows quadratically in the radius") {
  const Benchmark b = scalar_benchmark();
  Rng rng(5);
  const std::vector<double> r_grid = {0.01, 0.0178, 0.0316, 0.0562, 0.1, 0.178, 0.3};
  const auto res = exploration_cost_scaling(b.system, b.K0, r_grid, 200, 20, rng);
  CHECK(res.direct_fit.slope == doctest::Approx(2.0).epsilon(0.15));
  for (double v : res.direct_mean) CHECK(v > 0.0);
  // r -> 0 limit: the smallest radius has the smallest direct cost
  CHECK(res.direct_mean.front() < res.direct_mean.back());
}

TEST_CASE("gradient fidelity: error decays in m and the exact-cost bias is within beta r") {
  const Benchmark b = scalar_benchmark();
  const RegularityConstants c = derive_constants(b.system, b.K0);
  Rng rng(6);
  const std::vector<long> m_grid = {100, 1000, 10000};
  const auto res = gradient_fidelity(b.system, b.K0, 0.1, m_grid, 20, 5, rng);
  CHECK(res.exponent < -0.3);
  CHECK(res.exponent > -0.7);
  CHECK(res.floor_exact <= c.beta * 0.1);

  // halving r shrinks the bias floor (probed at radii where bias dominates
  // the Monte-Carlo error)
  Rng rng2(6);
  const auto big = gradient_fidelity(b.system, b.K0, 0.3, {100000}, 20, 2, rng2);
  Rng rng3(6);
  const auto small = gradient_fidelity(b.system, b.K0, 0.15, {100000}, 20, 2, rng3);
  CHECK(small.floor_exact <= big.floor_exact);
}

TEST_CASE("regret scaling runs deterministically and fits a slope") {
  Benchmark b = scalar_benchmark();
  const RegularityConstants c = derive_constants(b.system, b.K0);
  SweepConfig cfg;
  cfg.horizons = {2000, 4000, 8000};
  cfg.seeds = 3;
  cfg.overrides = scalar_desk_overrides(c);
  cfg.bootstrap_resamples = 50;
  const RegretScalingResult r1 = regret_scaling(b, cfg);
  const RegretScalingResult r2 = regret_scaling(b, cfg);
  CHECK(r1.total_runs == 9);
  for (size_t h = 0; h < r1.regrets.size(); ++h)
    for (size_t s = 0; s < r1.regrets[h].size(); ++s)
      REQUIRE(r1.regrets[h][s] == doctest::Approx(r2.regrets[h][s]).epsilon(1e-15));
  CHECK(std::isfinite(r1.fit.slope));
  CHECK(r1.fit.slope_se > 0.0);

  const RegretScalingResult fixed = fixed_controller_scaling(b, b.K0, cfg);
  // a fixed suboptimal controller accrues regret ~ T * (J(K0) - J*): slope ~ 1
  CHECK(fixed.fit.slope == doctest::Approx(1.0).epsilon(0.1));
  const double gap = infinite_horizon_cost(b.system, b.K0) - solve_optimal(b.system).J;
  CHECK(mean_of(fixed.regrets[2]) == doctest::Approx(8000.0 * gap).epsilon(0.1));
}

TEST_CASE("playing the optimal controller leaves near-zero regret") {
  Benchmark b = scalar_benchmark();
  const OptimalSolution opt = solve_optimal(b.system);
  SweepConfig cfg;
  cfg.horizons = {5000, 20000};
  cfg.seeds = 10;
  cfg.bootstrap_resamples = 50;
  const RegretScalingResult res = fixed_controller_scaling(b, opt.K, cfg);
  for (size_t h = 0; h < res.regrets.size(); ++h) {
    const double avg = mean_of(res.regrets[h]);
    CHECK(std::abs(avg) / static_cast<double>(cfg.horizons[h]) < 0.02);
  }
}

TEST_CASE("report emitters produce stable CSV artifacts") {
  const auto dir = std::filesystem::temp_directory_path() / "lqrpg_test_reports";
  std::filesystem::remove_all(dir);

  // header-only CSV when there is nothing to report
  {
    CsvWriter csv(dir / "empty.csv", {"a", "b"});
  }
  CHECK(slurp(dir / "empty.csv") == "a,b\n");

  const Benchmark b = scalar_benchmark();
  const RegularityConstants c = derive_constants(b.system, b.K0);
  const Schedule s = derive_schedule(c, 4000, 0.05, 1, 1, b.system.noise.bound_W,
                                       scalar_desk_overrides(c));
  Rng rng(9);
  const RegretTrace trace = run(b.system, b.K0, s, 4000, rng);
  write_trace_csv(dir / "trace.csv", trace);
  write_epochs_csv(dir / "epochs.csv", trace);
  const std::string t1 = slurp(dir / "trace.csv");
  CHECK(t1.substr(0, t1.find('\n')) == "t,cost,epoch,subepoch,regret_partial");
  // exactly T data rows
  CHECK(std::count(t1.begin(), t1.end(), '\n') == 4001);

  Rng rng2(9);
  const RegretTrace trace2 = run(b.system, b.K0, s, 4000, rng2);
  write_trace_csv(dir / "trace2.csv", trace2);
  CHECK(slurp(dir / "trace2.csv") == t1);  // byte-identical for equal seeds

  SweepConfig cfg;
  cfg.horizons = {2000, 4000};
  cfg.seeds = 2;
  cfg.overrides = scalar_desk_overrides(c);
  cfg.bootstrap_resamples = 20;
  const RegretScalingResult learner = regret_scaling(b, cfg);
  const RegretScalingResult baseline = fixed_controller_scaling(b, b.K0, cfg);
  write_regret_scaling_report(dir, cfg, learner, &baseline);
  CHECK(std::filesystem::exists(dir / "regret_scaling.csv"));
  CHECK(std::filesystem::exists(dir / "regret_scaling_fit.csv"));
  CHECK(std::filesystem::exists(dir / "regret_scaling.svg"));

  Rng rng3(10);
  const auto exp_res =
      exploration_cost_scaling(b.system, b.K0, {0.05, 0.1, 0.2}, 50, 10, rng3);
  write_exploration_report(dir, b.name, exp_res);
  CHECK(std::filesystem::exists(dir / "exploration_cost_scalar.csv"));

  std::filesystem::remove_all(dir);
}

TEST_CASE("validation suites pass in quick mode") {
  const auto results = run_validation(/*quick=*/true, /*seed=*/1);
  REQUIRE(results.size() == 5);
  for (const auto& r : results) {
    INFO(r.name, ": ", r.detail);
    CHECK(r.passed);
  }
}
