#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "lqrpg/lqr_core.hpp"
#include "lqrpg/rng.hpp"

namespace lqrpg {

struct DivergenceDetected : std::runtime_error {
  DivergenceDetected(long step, double value)
      : std::runtime_error("objective escaped its sub-level set at step " + std::to_string(step) +
                           " (f = " + std::to_string(value) + ")"),
        step(step),
        value(value) {}
  long step;
  double value;
};

// Uniform draw from the Frobenius unit sphere of d_u x d_x matrices:
// i.i.d. Gaussian entries, normalized (the all-zeros draw is resampled).
inline Matrix sample_sphere(Eigen::Index d_u, Eigen::Index d_x, Rng& rng) {
  if (d_u < 1 || d_x < 1) throw InvalidArgumentError("sphere dimensions must be >= 1");
  for (;;) {
    Matrix U(d_u, d_x);
    for (Eigen::Index i = 0; i < d_u; ++i)
      for (Eigen::Index j = 0; j < d_x; ++j) U(i, j) = rng.gaussian();
    const double n = U.norm();
    if (n > 0.0) return U / n;
  }
}

// Batched one-point estimator: (d_x d_u / (m r)) Σ_i cost_i · U_i.
inline Matrix one_point_estimate(const std::vector<double>& costs,
                                 const std::vector<Matrix>& dirs, double r) {
  if (costs.size() != dirs.size())
    throw InvalidArgumentError("one_point_estimate: costs/dirs length mismatch");
  if (dirs.empty()) throw InvalidArgumentError("one_point_estimate: need at least one sample");
  if (!(r > 0.0)) throw InvalidArgumentError("one_point_estimate: r must be positive");
  const double d_u = static_cast<double>(dirs[0].rows());
  const double d_x = static_cast<double>(dirs[0].cols());
  Matrix sum = Matrix::Zero(dirs[0].rows(), dirs[0].cols());
  for (size_t i = 0; i < dirs.size(); ++i) sum += costs[i] * dirs[i];
  return (d_x * d_u / (static_cast<double>(costs.size()) * r)) * sum;
}

// Monte-Carlo estimate of the smoothed objective f_r(x) = E_B[f(x + rB)],
// B uniform on the unit ball (sphere direction scaled by u^(1/dim)).
template <class F>
double smoothed_value(F&& f, const Matrix& x, double r, long n_samples, Rng& rng) {
  if (!(r > 0.0)) throw InvalidArgumentError("smoothed_value: r must be positive");
  if (n_samples < 1) throw InvalidArgumentError("smoothed_value: need n_samples >= 1");
  const double dim = static_cast<double>(x.size());
  double acc = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const Matrix dir = sample_sphere(x.rows(), x.cols(), rng);
    const double radius = std::pow(rng.uniform(), 1.0 / dim);
    acc += f(x + (r * radius) * dir);
  }
  return acc / static_cast<double>(n_samples);
}

// Effective corruption: decayed running maximum of squared magnitudes,
// tracked by the O(1) recurrence eps_bar² = max(eps², rho · eps_bar²).
struct EffectiveCorruption {
  double rho;  // 1 - mu*eta/3
  double eps_bar_sq = 0.0;

  void update(double eps) { eps_bar_sq = std::max(eps * eps, rho * eps_bar_sq); }
};

struct GdOracleResult {
  Matrix grad;
  double eps = 0.0;  // known bound on ‖grad − ∇f(x)‖ at this step
};

struct GdParams {
  double eta;
  long steps;
  double mu;
  double f_star;
  double f_bar;  // sub-level guard; exceeding it signals violated preconditions
};

struct GdReport {
  std::vector<Matrix> iterates;  // x_0 .. x_T
  std::vector<double> values;    // f(x_t)
  std::vector<double> bounds;    // max{4 eps_bar²_{t-1}/mu, rho^t (f(x_0)-f*)} + f*
};

// Gradient descent under a corrupted oracle. The optimizer itself touches
// only the oracle output; f_probe is telemetry for values and the
// sub-level-escape guard.
template <class Oracle>
GdReport corrupted_gd(Oracle&& grad_oracle, const std::function<double(const Matrix&)>& f_probe,
                      Matrix x0, const GdParams& p) {
  const double rho = 1.0 - p.mu * p.eta / 3.0;
  EffectiveCorruption corr{rho};
  GdReport report;
  report.iterates.reserve(static_cast<size_t>(p.steps) + 1);
  Matrix x = std::move(x0);
  double decay = 1.0;  // rho^t
  double f0_gap = 0.0;
  for (long t = 0; t <= p.steps; ++t) {
    report.iterates.push_back(x);
    if (f_probe) {
      const double fx = f_probe(x);
      if (t == 0) f0_gap = fx - p.f_star;
      report.values.push_back(fx);
      if (fx > p.f_bar) throw DivergenceDetected(t, fx);
    }
    report.bounds.push_back(p.f_star +
                            std::max(4.0 * corr.eps_bar_sq / p.mu, decay * f0_gap));
    if (t == p.steps) break;
    GdOracleResult o = grad_oracle(x);
    corr.update(o.eps);
    x -= p.eta * o.grad;
    decay *= rho;
  }
  return report;
}

}  // namespace lqrpg
