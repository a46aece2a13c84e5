#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "lqrpg/lqr_core.hpp"
#include "lqrpg/rng.hpp"

namespace lqrpg {

inline constexpr double kStateOverflow = 1e12;

struct RolloutState {
  Vector x;
  long t = 0;
  double cost_last = 0.0;
};

// Parameters of the Gaussian-to-bounded reduction: crop N(0, Σ_w) to the
// Mahalanobis ball of radius √(5 d_x log(T/δ)).
struct TruncationParams {
  double W_bound;      // √(5 d_x λ_max(Σ_w) log(T/δ))
  double sigma_sq_eff; // λ_min(Σ_w) (1 − √(3δ/T))
  double radius;       // √(5 d_x log(T/δ))
  double delta;
  double T;
};

inline TruncationParams truncation_params(const Matrix& Sigma_w, double T, double delta) {
  if (!(delta > 0.0 && delta < 1.0 / 3.0))
    throw InvalidArgumentError("truncation requires 0 < delta < 1/3");
  if (!(T / delta > std::exp(1.0)))
    throw InvalidArgumentError("truncation requires T/delta > e");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Sigma_w);
  const double d = static_cast<double>(Sigma_w.rows());
  TruncationParams p;
  p.radius = std::sqrt(5.0 * d * std::log(T / delta));
  p.W_bound = std::sqrt(es.eigenvalues().maxCoeff()) * p.radius;
  p.sigma_sq_eff = es.eigenvalues().minCoeff() * (1.0 - std::sqrt(3.0 * delta / T));
  p.delta = delta;
  p.T = T;
  return p;
}

inline NoiseModel truncated_gaussian_for_horizon(Matrix Sigma_w, double T, double delta) {
  const TruncationParams p = truncation_params(Sigma_w, T, delta);
  NoiseModel m = NoiseModel::truncated_gaussian(std::move(Sigma_w), p.radius);
  m.sigma_sq = p.sigma_sq_eff;
  return m;
}

// Draws from a fixed NoiseModel; precomputes Σ_w^{1/2} once.
class NoiseSampler {
 public:
  explicit NoiseSampler(const NoiseModel& model) : model_(model) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(model.covariance);
    sqrt_cov_ = es.operatorSqrt();
    dim_ = model.covariance.rows();
  }

  Vector draw(Rng& rng) const {
    switch (model_.kind) {
      case NoiseKind::BoundedIid: {
        // Uniform on the unit ball, scaled so E[wwᵀ] = Σ_w and ‖w‖ ≤ W.
        Vector z = gaussian_vector(rng);
        double n = z.norm();
        while (n == 0.0) {
          z = gaussian_vector(rng);
          n = z.norm();
        }
        const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(dim_));
        return std::sqrt(static_cast<double>(dim_) + 2.0) * (sqrt_cov_ * (z * (radius / n)));
      }
      case NoiseKind::TruncatedGaussian: {
        // Rejection keeps the retained set symmetric, so the mean stays zero.
        for (;;) {
          const Vector z = gaussian_vector(rng);
          if (z.norm() <= model_.truncation_radius) return sqrt_cov_ * z;
        }
      }
    }
    throw InvalidArgumentError("unknown noise kind");
  }

 private:
  Vector gaussian_vector(Rng& rng) const {
    Vector z(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) z(i) = rng.gaussian();
    return z;
  }

  NoiseModel model_;
  Matrix sqrt_cov_;
  Eigen::Index dim_;
};

inline Vector draw_noise(const NoiseModel& model, Rng& rng) {
  return NoiseSampler(model).draw(rng);
}

// One step of x' = Ax + Bu + w with u = Kx; cost is charged at the current state.
inline RolloutState step(const LqrSystem& sys, const Controller& K, const RolloutState& state,
                         const NoiseSampler& noise, Rng& rng) {
  const Vector u = K.K * state.x;
  RolloutState next;
  next.cost_last = state.x.dot(sys.Q * state.x) + u.dot(sys.R * u);
  next.x = sys.A * state.x + sys.B * u + noise.draw(rng);
  next.t = state.t + 1;
  if (next.x.norm() > kStateOverflow)
    throw NumericOverflowError("state norm exceeded 1e12 at step " + std::to_string(next.t));
  return next;
}

inline RolloutState step(const LqrSystem& sys, const Controller& K, const RolloutState& state,
                         Rng& rng) {
  return step(sys, K, state, NoiseSampler(sys.noise), rng);
}

struct Rollout {
  std::vector<Vector> states;  // x_0 .. x_{n}
  std::vector<double> costs;   // c_0 .. c_{n-1}
};

// Play a fixed controller for n_steps from x0.
inline Rollout rollout_fixed(const LqrSystem& sys, const Controller& K, const Vector& x0,
                             long n_steps, Rng& rng) {
  if (n_steps < 1) throw InvalidArgumentError("rollout needs n_steps >= 1");
  const NoiseSampler noise(sys.noise);
  Rollout out;
  out.states.reserve(static_cast<size_t>(n_steps) + 1);
  out.costs.reserve(static_cast<size_t>(n_steps));
  RolloutState s;
  s.x = x0;
  out.states.push_back(s.x);
  for (long i = 0; i < n_steps; ++i) {
    s = step(sys, K, s, noise, rng);
    out.states.push_back(s.x);
    out.costs.push_back(s.cost_last);
  }
  return out;
}

}  // namespace lqrpg
