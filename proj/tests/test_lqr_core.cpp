#include <doctest.h>

#include "lqrpg/experiments.hpp"
#include "lqrpg/lqr_core.hpp"
#include "lqrpg/validate.hpp"

using namespace lqrpg;

namespace {

// Brute-force covariance recursion, independent of the fixed-point solver.
Matrix sigma_by_recursion(const LqrSystem& sys, const Controller& K, int iters) {
  const Matrix M = sys.A + sys.B * K.K;
  Matrix S = Matrix::Zero(sys.dx(), sys.dx());
  for (int i = 0; i < iters; ++i) S = sys.noise.covariance + M * S * M.transpose();
  return S;
}

LqrSystem random_3x2(std::uint64_t seed) {
  Rng rng(seed);
  return make_random_stable_system(3, 2, rng);
}

}  // namespace

TEST_CASE("scalar closed forms: Sigma = P = J = 4/3 at K = 0") {
  const Benchmark b = scalar_benchmark();
  const Controller K0{Matrix::Zero(1, 1)};
  CHECK(solve_sigma(b.system, K0)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
  CHECK(solve_P(b.system, K0)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
  CHECK(infinite_horizon_cost(b.system, K0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("A = 0, K = 0 gives P = Q") {
  LqrSystem sys;
  sys.A = Matrix::Zero(2, 2);
  sys.B = Matrix::Identity(2, 2);
  sys.Q = (Matrix(2, 2) << 0.7, 0.1, 0.1, 0.9).finished();
  sys.R = Matrix::Identity(2, 2);
  sys.noise = NoiseModel::bounded_iid(Matrix::Identity(2, 2));
  const Controller K{Matrix::Zero(2, 2)};
  CHECK((solve_P(sys, K) - sys.Q).norm() < 1e-12);
}

TEST_CASE("Sigma matches the 1e4-step recursion oracle") {
  const LqrSystem sys = random_3x2(11);
  const Controller K{Matrix::Zero(2, 3)};
  CHECK((solve_sigma(sys, K) - sigma_by_recursion(sys, K, 10000)).norm() < 1e-8);
}

TEST_CASE("both cost formulas agree") {
  const LqrSystem sys = random_3x2(17);
  const Controller K{Matrix::Zero(2, 3)};
  const SteadyStateSolution s = steady_state(sys, K);
  const double via_P = (s.P * sys.noise.covariance).trace();
  const double via_Sigma = ((sys.Q + K.K.transpose() * sys.R * K.K) * s.Sigma).trace();
  CHECK(std::abs(via_P - via_Sigma) < 1e-10);
  CHECK(s.J == doctest::Approx(via_P));
}

TEST_CASE("scalar policy gradient equals 16/9 at K = 0") {
  const Benchmark b = scalar_benchmark();
  CHECK(exact_policy_gradient(b.system, b.K0)(0, 0) ==
        doctest::Approx(16.0 / 9.0).epsilon(1e-10));
}

TEST_CASE("policy gradient matches central finite differences") {
  const LqrSystem sys = random_3x2(23);
  const Controller K{0.05 * Matrix::Ones(2, 3)};
  const Matrix exact = exact_policy_gradient(sys, K);
  const Matrix fd = fd_policy_gradient(sys, K);
  CHECK((exact - fd).norm() / fd.norm() < 1e-4);
}

TEST_CASE("unstable closed loop is flagged") {
  LqrSystem sys;
  sys.A = 1.5 * Matrix::Identity(1, 1);
  sys.B = Matrix::Identity(1, 1);
  sys.Q = sys.R = Matrix::Identity(1, 1);
  sys.noise = NoiseModel::bounded_iid(Matrix::Identity(1, 1));
  const Controller K{Matrix::Zero(1, 1)};
  CHECK(infinite_horizon_cost(sys, K) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(solve_sigma(sys, K), UnstableError);
  CHECK_THROWS_AS(exact_policy_gradient(sys, K), UnstableError);
}

TEST_CASE("scalar Riccati solution matches the hand-solved quadratic") {
  // p solves p^2 - 0.25 p - 1 = 0 (from p = 1 + 0.25 p / (1 + p)).
  const double p_star = (0.25 + std::sqrt(4.0625)) / 2.0;
  const Benchmark b = scalar_benchmark();
  const OptimalSolution opt = solve_optimal(b.system);
  CHECK(opt.P(0, 0) == doctest::Approx(p_star).epsilon(1e-9));
  CHECK(opt.P(0, 0) == doctest::Approx(1.132782).epsilon(1e-5));
  CHECK(opt.K.K(0, 0) == doctest::Approx(-0.265564).epsilon(1e-4));
  CHECK(opt.J == doctest::Approx(p_star).epsilon(1e-9));
  // optimum is a stationary point and a local minimum
  CHECK(exact_policy_gradient(b.system, opt.K).norm() < 1e-8);
}

TEST_CASE("A = 0 makes the zero controller optimal") {
  LqrSystem sys;
  sys.A = Matrix::Zero(2, 2);
  sys.B = Matrix::Identity(2, 2);
  sys.Q = sys.R = Matrix::Identity(2, 2);
  sys.noise = NoiseModel::bounded_iid(Matrix::Identity(2, 2));
  CHECK(solve_optimal(sys).K.K.norm() < 1e-12);
}

TEST_CASE("optimal controller is a local minimum under random perturbations") {
  const LqrSystem sys = random_3x2(29);
  const OptimalSolution opt = solve_optimal(sys);
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const Matrix delta = 0.01 * sample_sphere(2, 3, rng);
    CHECK(infinite_horizon_cost(sys, Controller{opt.K.K + delta}) >= opt.J - 1e-12);
  }
}

TEST_CASE("regularity constants: trivial and hand-evaluated cases") {
  const RegularityConstants c1 = regularity_constants(1.0, 1.0, 1.0, 1.0, 1);
  CHECK(c1.kappa == doctest::Approx(1.0));
  CHECK(c1.gamma == doctest::Approx(0.5));

  const RegularityConstants c2 = regularity_constants(4.0, 1.0, 1.0, 1.0, 1);
  CHECK(c2.kappa == doctest::Approx(2.0));
  CHECK(c2.D0 == doctest::Approx(1.0 / 64.0));
  CHECK(c2.mu == doctest::Approx(1.0));
  CHECK(c2.G == doctest::Approx(2048.0));
  CHECK(c2.beta == doctest::Approx(114688.0));
}

TEST_CASE("psi derivation rounds the operator norm up at the 4th decimal") {
  Benchmark b = scalar_benchmark();
  CHECK(derive_psi(b.system) == doctest::Approx(1.0));
  b.system.B = Matrix::Constant(1, 1, 1.23456);
  CHECK(derive_psi(b.system) == doctest::Approx(1.2346));
  b.system.B = Matrix::Constant(1, 1, 0.5);
  CHECK(derive_psi(b.system) == doctest::Approx(1.0));  // floored at 1
}

TEST_CASE("nu default and admissibility certificate") {
  const Benchmark b = scalar_benchmark();
  CHECK(default_nu(b.system, b.K0) == doctest::Approx(16.0 / 3.0).epsilon(1e-9));
  LqrSystem bad = b.system;
  bad.A = 1.5 * Matrix::Identity(1, 1);
  CHECK_THROWS_AS(default_nu(bad, b.K0), InvalidArgumentError);

  const LqrSystem sys = random_3x2(31);
  const Controller K{Matrix::Zero(2, 3)};
  const RegularityConstants c = derive_constants(sys, K);
  const auto cert = strong_stability(sys, K, c);
  REQUIRE(cert.has_value());
  CHECK(spectral_radius(sys.A + sys.B * K.K) <= 1.0 - cert->gamma + 1e-12);
  // an inadmissible controller (J > nu) gets no certificate
  const double nu_small = 0.5 * infinite_horizon_cost(sys, K);
  const auto none =
      strong_stability(sys, K, regularity_constants(nu_small, c.alpha0, c.psi, c.sigma_sq, 3));
  CHECK_FALSE(none.has_value());
}

TEST_CASE("spectral helpers agree with Eigen decompositions") {
  const Matrix M = (Matrix(2, 2) << 0.0, 1.0, -0.81, 0.0).finished();  // complex pair
  CHECK(spectral_radius(M) == doctest::Approx(0.9).epsilon(1e-12));
  const Matrix S = (Matrix(2, 2) << 3.0, 0.0, 0.0, -5.0).finished();
  CHECK(spectral_norm(S) == doctest::Approx(5.0));
}
