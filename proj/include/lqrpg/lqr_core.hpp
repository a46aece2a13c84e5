#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <optional>

#include "lqrpg/errors.hpp"

namespace lqrpg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-12;
inline constexpr long kSolverBudget = 1'000'000;
inline constexpr double kStabilityMargin = 1e-9;

enum class NoiseKind { BoundedIid, TruncatedGaussian };

// Zero-mean i.i.d. process noise with covariance Σ_w ⪰ σ²I and an
// almost-sure norm bound W.
struct NoiseModel {
  NoiseKind kind = NoiseKind::BoundedIid;
  Matrix covariance;         // Σ_w
  double sigma_sq = 0.0;     // lower bound on λ_min(Σ_w)
  double bound_W = 0.0;      // ‖w‖ ≤ W almost surely
  double truncation_radius = 0.0;  // TruncatedGaussian: bound on ‖Σ_w^{-1/2} w‖

  // Uniform-on-ball noise shaped to covariance `cov`. The sampler scales a
  // unit-ball vector by √(d+2)·Σ_w^{1/2}, so ‖w‖ ≤ √((d+2)·λ_max) surely.
  static NoiseModel bounded_iid(Matrix cov) {
    NoiseModel m;
    m.kind = NoiseKind::BoundedIid;
    const double d = static_cast<double>(cov.rows());
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    m.sigma_sq = es.eigenvalues().minCoeff();
    m.bound_W = std::sqrt((d + 2.0) * es.eigenvalues().maxCoeff());
    m.covariance = std::move(cov);
    return m;
  }

  // N(0, Σ_w) conditioned on ‖Σ_w^{-1/2} w‖ ≤ radius.
  static NoiseModel truncated_gaussian(Matrix cov, double radius) {
    if (radius <= 0.0) throw InvalidArgumentError("truncation radius must be positive");
    NoiseModel m;
    m.kind = NoiseKind::TruncatedGaussian;
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    m.sigma_sq = es.eigenvalues().minCoeff();
    m.bound_W = std::sqrt(es.eigenvalues().maxCoeff()) * radius;
    m.truncation_radius = radius;
    m.covariance = std::move(cov);
    return m;
  }
};

// Linear feedback gain u = Kx.
struct Controller {
  Matrix K;
};

// The plant: x' = Ax + Bu + w, cost xᵀQx + uᵀRu.
struct LqrSystem {
  Matrix A, B, Q, R;
  NoiseModel noise;

  Eigen::Index dx() const { return A.rows(); }
  Eigen::Index du() const { return B.cols(); }

  void validate() const {
    if (A.rows() != A.cols()) throw InvalidArgumentError("A must be square");
    if (B.rows() != A.rows()) throw InvalidArgumentError("B row count must match A");
    if (Q.rows() != A.rows() || Q.cols() != A.rows())
      throw InvalidArgumentError("Q must be d_x x d_x");
    if (R.rows() != B.cols() || R.cols() != B.cols())
      throw InvalidArgumentError("R must be d_u x d_u");
    if ((Q - Q.transpose()).norm() > 1e-10) throw InvalidArgumentError("Q must be symmetric");
    if ((R - R.transpose()).norm() > 1e-10) throw InvalidArgumentError("R must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eq(Q), er(R);
    if (eq.eigenvalues().minCoeff() <= 0.0) throw InvalidArgumentError("Q must be positive definite");
    if (er.eigenvalues().minCoeff() <= 0.0) throw InvalidArgumentError("R must be positive definite");
    if (noise.covariance.rows() != A.rows() || noise.covariance.cols() != A.rows())
      throw InvalidArgumentError("noise covariance must be d_x x d_x");
    if (noise.sigma_sq <= 0.0) throw InvalidArgumentError("noise sigma_sq must be positive");
    if (noise.bound_W <= 0.0) throw InvalidArgumentError("noise bound_W must be positive");
    Eigen::SelfAdjointEigenSolver<Matrix> ew(noise.covariance);
    if (ew.eigenvalues().minCoeff() < noise.sigma_sq - 1e-9)
      throw InvalidArgumentError("lambda_min(covariance) must be >= sigma_sq");
  }

  // Q, R ⪯ I is assumed w.l.o.g. by the analysis; reported, not enforced.
  bool cost_normalized() const {
    Eigen::SelfAdjointEigenSolver<Matrix> eq(Q), er(R);
    return eq.eigenvalues().maxCoeff() <= 1.0 + 1e-12 &&
           er.eigenvalues().maxCoeff() <= 1.0 + 1e-12;
  }

  // 1/α₀ bounds ‖Q⁻¹‖ and ‖R⁻¹‖.
  double alpha0() const {
    Eigen::SelfAdjointEigenSolver<Matrix> eq(Q), er(R);
    return std::min(eq.eigenvalues().minCoeff(), er.eigenvalues().minCoeff());
  }
};

struct SteadyStateSolution {
  Matrix P;      // cost-to-go P_K
  Matrix Sigma;  // steady-state covariance Σ_K
  double J;      // infinite-horizon average cost
};

inline double spectral_radius(const Matrix& M) {
  return Eigen::EigenSolver<Matrix>(M, /*computeEigenvectors=*/false)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

inline double spectral_norm(const Matrix& M) {
  return M.jacobiSvd().singularValues()(0);
}

namespace detail {

inline Matrix closed_loop(const LqrSystem& sys, const Controller& K) {
  return sys.A + sys.B * K.K;
}

inline void require_stable(const Matrix& M) {
  const double rho = spectral_radius(M);
  if (rho >= 1.0 - kStabilityMargin) throw UnstableError(rho);
}

// Fixed point of X = C + M1 X M2, contracting when ρ(M1)ρ(M2) < 1.
// The successive-iterate gap equals the residual of the returned X.
inline Matrix lyapunov_fixed_point(const Matrix& C, const Matrix& M1, const Matrix& M2,
                                   double tol) {
  Matrix X = C;
  for (long it = 0; it < kSolverBudget; ++it) {
    Matrix next = C + M1 * X * M2;
    next = 0.5 * (next + next.transpose().eval());
    const double gap = (next - X).norm();
    X = std::move(next);
    if (gap <= tol) return X;
  }
  throw NoConvergenceError("Lyapunov fixed-point iteration exhausted its budget");
}

}  // namespace detail

// Σ_K = Σ_w + (A+BK) Σ_K (A+BK)ᵀ.
inline Matrix solve_sigma(const LqrSystem& sys, const Controller& K, double tol = kDefaultTol) {
  const Matrix M = detail::closed_loop(sys, K);
  detail::require_stable(M);
  return detail::lyapunov_fixed_point(sys.noise.covariance, M, M.transpose(), tol);
}

// P_K = Q + KᵀRK + (A+BK)ᵀ P_K (A+BK).
inline Matrix solve_P(const LqrSystem& sys, const Controller& K, double tol = kDefaultTol) {
  const Matrix M = detail::closed_loop(sys, K);
  detail::require_stable(M);
  const Matrix C = sys.Q + K.K.transpose() * sys.R * K.K;
  return detail::lyapunov_fixed_point(C, M.transpose(), M, tol);
}

// J(K) = tr(P_K Σ_w); +inf encodes an unstable closed loop.
inline double infinite_horizon_cost(const LqrSystem& sys, const Controller& K) {
  const Matrix M = detail::closed_loop(sys, K);
  if (spectral_radius(M) >= 1.0 - kStabilityMargin)
    return std::numeric_limits<double>::infinity();
  return (solve_P(sys, K) * sys.noise.covariance).trace();
}

inline SteadyStateSolution steady_state(const LqrSystem& sys, const Controller& K,
                                        double tol = kDefaultTol) {
  SteadyStateSolution s;
  s.P = solve_P(sys, K, tol);
  s.Sigma = solve_sigma(sys, K, tol);
  s.J = (s.P * sys.noise.covariance).trace();
  return s;
}

// ∇J(K) = 2 E_K Σ_K with E_K = RK + Bᵀ P_K (A+BK).
inline Matrix exact_policy_gradient(const LqrSystem& sys, const Controller& K) {
  const Matrix M = detail::closed_loop(sys, K);
  detail::require_stable(M);
  const Matrix P = solve_P(sys, K);
  const Matrix Sigma = solve_sigma(sys, K);
  const Matrix E = sys.R * K.K + sys.B.transpose() * P * M;
  return 2.0 * E * Sigma;
}

struct OptimalSolution {
  Controller K;
  double J;
  Matrix P;
};

// Discrete Riccati fixed point: P ← Q + AᵀPA − AᵀPB(R+BᵀPB)⁻¹BᵀPA.
inline OptimalSolution solve_optimal(const LqrSystem& sys, double tol = kDefaultTol) {
  Matrix P = sys.Q;
  for (long it = 0; it < kSolverBudget; ++it) {
    const Matrix BtP = sys.B.transpose() * P;
    const Matrix gain = (sys.R + BtP * sys.B).ldlt().solve(BtP * sys.A);
    Matrix next = sys.Q + sys.A.transpose() * P * sys.A -
                  (sys.A.transpose() * BtP.transpose()) * gain;
    next = 0.5 * (next + next.transpose().eval());
    const double gap = (next - P).norm();
    P = std::move(next);
    if (gap <= tol) {
      const Matrix BtPf = sys.B.transpose() * P;
      OptimalSolution opt;
      opt.K.K = -(sys.R + BtPf * sys.B).ldlt().solve(BtPf * sys.A);
      opt.P = P;
      opt.J = (P * sys.noise.covariance).trace();
      return opt;
    }
  }
  throw NoConvergenceError("Riccati fixed-point iteration exhausted its budget");
}

// Constants governing the admissible set K = {K : J(K) <= nu}.
struct RegularityConstants {
  double nu = 0.0;        // admissibility cost bound
  double alpha0 = 0.0;    // min-eigenvalue bound on Q, R
  double psi = 1.0;       // ψ ≥ max(1, ‖B‖)
  double sigma_sq = 0.0;  // noise lower bound σ²
  double d_x = 0.0;

  double kappa = 0.0;  // √(ν/(α₀σ²))
  double gamma = 0.0;  // 1/(2κ²)
  double D0 = 0.0;     // local radius 1/(8ψκ³)
  double G = 0.0;      // Lipschitz 4ψνκ⁷/α₀
  double beta = 0.0;   // smoothness 112√d_x·νψ²κ⁸/α₀
  double mu = 0.0;     // PL constant 4ν/κ⁴
};

inline RegularityConstants regularity_constants(double nu, double alpha0, double psi,
                                                double sigma_sq, Eigen::Index d_x) {
  if (nu <= 0.0 || alpha0 <= 0.0 || sigma_sq <= 0.0 || d_x < 1)
    throw InvalidArgumentError("regularity constants require positive inputs");
  if (psi < 1.0) throw InvalidArgumentError("psi must be >= 1");
  RegularityConstants c;
  c.nu = nu;
  c.alpha0 = alpha0;
  c.psi = psi;
  c.sigma_sq = sigma_sq;
  c.d_x = static_cast<double>(d_x);
  c.kappa = std::sqrt(nu / (alpha0 * sigma_sq));
  c.gamma = 1.0 / (2.0 * c.kappa * c.kappa);
  c.D0 = 1.0 / (8.0 * psi * std::pow(c.kappa, 3));
  c.G = 4.0 * psi * nu * std::pow(c.kappa, 7) / alpha0;
  c.beta = 112.0 * std::sqrt(c.d_x) * nu * psi * psi * std::pow(c.kappa, 8) / alpha0;
  c.mu = 4.0 * nu / std::pow(c.kappa, 4);
  if (!(c.kappa >= 1.0))
    throw InvalidArgumentError("kappa < 1: nu must be at least alpha0 * sigma_sq");
  return c;
}

// ψ auto-derivation: ‖B‖₂ rounded up at the 4th decimal, floored at 1.
inline double derive_psi(const LqrSystem& sys) {
  const double b = spectral_norm(sys.B);
  return std::max(1.0, std::ceil(b * 1e4) / 1e4);
}

// ν default honoring J(K0) <= ν/4.
inline double default_nu(const LqrSystem& sys, const Controller& K0) {
  const double j0 = infinite_horizon_cost(sys, K0);
  if (!std::isfinite(j0)) throw InvalidArgumentError("K0 must stabilize the system");
  return 4.0 * j0;
}

inline RegularityConstants derive_constants(const LqrSystem& sys, const Controller& K0) {
  return regularity_constants(default_nu(sys, K0), sys.alpha0(), derive_psi(sys),
                              sys.noise.sigma_sq, sys.dx());
}

struct StrongStability {
  double kappa;
  double gamma;
};

// Admissible controllers are (κ, γ)-strongly stable; certifies the implied
// spectral radius bound and returns nullopt when J(K) > ν.
inline std::optional<StrongStability> strong_stability(const LqrSystem& sys, const Controller& K,
                                                       const RegularityConstants& c) {
  const double J = infinite_horizon_cost(sys, K);
  if (!(J <= c.nu)) return std::nullopt;
  const double rho = spectral_radius(detail::closed_loop(sys, K));
  if (rho > 1.0 - c.gamma * (1.0 - kStabilityMargin)) return std::nullopt;
  return StrongStability{c.kappa, c.gamma};
}

}  // namespace lqrpg
