#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lqrpg/lqr_core.hpp"
#include "lqrpg/simulator.hpp"
#include "lqrpg/smoothing_gd.hpp"

namespace lqrpg {

// Desk-scale multipliers on top of the theoretical parameter schedule.
struct ScheduleOverrides {
  double eta_mult = 1.0;
  double r0_mult = 1.0;
  double m0_mult = 1.0;
  double tau_mult = 1.0;
};

struct Schedule {
  double eta = 0.0;
  long tau = 1;
  double mu = 0.0;
  double r0 = 0.0;
  double m0 = 1.0;  // real-valued; per-epoch counts are ceil(m0 * rho^{-2j})
  double rho = 0.0; // 1 - mu*eta/3
  double delta = 0.0;
  double nu = 0.0;
  double D0 = 0.0;

  // Theoretical values before overrides, kept for reporting.
  double eta_theory = 0.0;
  double tau_theory = 0.0;
  double r0_theory = 0.0;
  double m0_theory = 0.0;

  ScheduleOverrides overrides;
  // Set when the (overridden) schedule cannot complete even one epoch
  // within T; the run still executes, truncated.
  bool theoretical_only = false;
  // Set when an explicit override pushed r0 beyond the admissibility
  // radius D0; desk-scale runs do this deliberately, so it is a flag
  // rather than a clamp.
  bool r0_exceeds_D0 = false;
};

inline Schedule derive_schedule(const RegularityConstants& c, long T, double delta,
                                  Eigen::Index d_x, Eigen::Index d_u, double W_bound,
                                  const ScheduleOverrides& ov = {}) {
  if (T < 1) throw InvalidArgumentError("schedule requires T >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgumentError("delta must be in (0,1)");
  const double k = c.kappa;
  const double dxd = static_cast<double>(d_x);
  const double dud = static_cast<double>(d_u);

  Schedule s;
  s.delta = delta;
  s.nu = c.nu;
  s.D0 = c.D0;
  s.mu = c.mu;
  s.eta_theory = c.alpha0 / (128.0 * c.nu * c.psi * c.psi * std::pow(k, 10));
  s.tau_theory = 2.0 * k * k * std::log(7.0 * k * static_cast<double>(T));
  s.r0_theory = c.alpha0 / (448.0 * std::sqrt(dxd) * c.psi * c.psi * std::pow(k, 10));
  const double sqrt_m0 = std::pow(2.0, 17) * dud * std::pow(dxd, 1.5) * c.psi * c.psi *
                         std::pow(k, 20) * W_bound * W_bound / (c.alpha0 * c.sigma_sq) *
                         std::sqrt(std::log(240.0 * std::pow(static_cast<double>(T), 4) / delta));
  s.m0_theory = sqrt_m0 * sqrt_m0;

  s.overrides = ov;
  s.eta = s.eta_theory * ov.eta_mult;
  s.tau = std::max<long>(1, static_cast<long>(std::ceil(s.tau_theory * ov.tau_mult)));
  // The theoretical radius respects the admissibility ball; an explicit
  // override may exceed it (flagged, not clamped).
  s.r0 = std::min(s.r0_theory, c.D0) * ov.r0_mult;
  s.r0_exceeds_D0 = s.r0 > c.D0;
  s.m0 = std::max(1.0, s.m0_theory * ov.m0_mult);
  s.rho = 1.0 - s.mu * s.eta / 3.0;
  if (!(s.rho > 0.0 && s.rho < 1.0))
    throw InvalidArgumentError("schedule needs 0 < 1 - mu*eta/3 < 1; reduce eta_mult");
  s.theoretical_only = s.m0 * static_cast<double>(s.tau) > static_cast<double>(T);
  return s;
}

struct EpochPlanEntry {
  long j;
  double r;
  double m;  // ceil(m0 * rho^{-2j}), may exceed what the horizon admits
};

// Deterministic epoch layout: epochs until the cumulative m_j * tau covers T.
inline std::vector<EpochPlanEntry> epoch_plan(const Schedule& s, long T) {
  std::vector<EpochPlanEntry> plan;
  double steps = 0.0;
  for (long j = 0;; ++j) {
    EpochPlanEntry e;
    e.j = j;
    e.r = s.r0 * std::pow(s.rho, static_cast<double>(j) / 2.0);
    e.m = std::ceil(s.m0 * std::pow(s.rho, -2.0 * static_cast<double>(j)));
    plan.push_back(e);
    steps += e.m * static_cast<double>(s.tau);
    if (steps >= static_cast<double>(T)) break;
  }
  return plan;
}

struct EpochRecord {
  long j = 0;
  Matrix K;              // underlying controller at epoch start
  double r = 0.0;
  double m_planned = 0.0;
  long m_realized = 0;   // sub-epochs that produced a cost sample
  Matrix g;              // gradient estimate
  std::vector<double> final_costs;

  // Ground-truth diagnostics; never visible to the learner.
  double J_K = 0.0;
  double grad_true_norm = 0.0;
  double grad_est_norm = 0.0;
  double grad_angle_deg = 0.0;
};

struct RegretTrace {
  std::vector<double> costs;      // per-step c_t, length = realized steps
  std::vector<long> epoch_of;     // epoch index per step
  std::vector<long> subepoch_of;  // sub-epoch index per step
  double J_star = 0.0;
  std::vector<EpochRecord> epochs;
  Matrix K_final;
  bool diverged = false;
  std::string divergence_reason;
  bool k0_warning = false;  // J(K0) > nu/4

  std::vector<double> regret_curve() const {
    std::vector<double> curve(costs.size());
    double acc = 0.0;
    for (size_t t = 0; t < costs.size(); ++t) {
      acc += costs[t] - J_star;
      curve[t] = acc;
    }
    return curve;
  }
};

inline double regret(const RegretTrace& trace) {
  double acc = 0.0;
  for (double c : trace.costs) acc += c - trace.J_star;
  return acc;
}

// Algorithm: epochs of m_j sub-epochs; each sub-epoch plays K_j + r_j U for
// tau rounds (state carried over, no resets) and keeps the final-round cost.
// The update path sees only those scalar costs and the drawn directions.
inline RegretTrace run(const LqrSystem& sys, const Controller& K0, const Schedule& sched, long T,
                       Rng& rng) {
  RegretTrace trace;
  trace.costs.reserve(static_cast<size_t>(T));
  trace.epoch_of.reserve(static_cast<size_t>(T));
  trace.subepoch_of.reserve(static_cast<size_t>(T));
  trace.J_star = solve_optimal(sys).J;

  const double j_k0 = infinite_horizon_cost(sys, K0);
  trace.k0_warning = !(j_k0 <= sched.nu / 4.0);

  const NoiseSampler noise(sys.noise);
  RolloutState state;
  state.x = Vector::Zero(sys.dx());

  Matrix K = K0.K;
  long t = 0;
  for (long j = 0; t < T; ++j) {
    const double r_j = sched.r0 * std::pow(sched.rho, static_cast<double>(j) / 2.0);
    const double m_j = std::ceil(sched.m0 * std::pow(sched.rho, -2.0 * static_cast<double>(j)));

    EpochRecord rec;
    rec.j = j;
    rec.K = K;
    rec.r = r_j;
    rec.m_planned = m_j;
    Matrix grad_true = Matrix::Zero(sys.du(), sys.dx());
    try {
      rec.J_K = infinite_horizon_cost(sys, Controller{K});
      if (std::isfinite(rec.J_K)) grad_true = exact_policy_gradient(sys, Controller{K});
    } catch (const NoConvergenceError&) {
      rec.J_K = std::numeric_limits<double>::infinity();  // marginally stable
    }
    if (!std::isfinite(rec.J_K)) {
      trace.diverged = true;
      trace.divergence_reason = "J(K_j) is infinite at epoch " + std::to_string(j);
      trace.epochs.push_back(std::move(rec));
      break;
    }
    rec.grad_true_norm = grad_true.norm();

    std::vector<double> final_costs;
    std::vector<Matrix> dirs;
    bool overflow = false;
    for (double i = 0.0; i < m_j && t < T; i += 1.0) {
      const Matrix U = sample_sphere(sys.du(), sys.dx(), rng);
      const Controller played{K + r_j * U};
      bool complete = true;
      double c_final = 0.0;
      for (long s = 0; s < sched.tau; ++s) {
        if (t >= T) {
          complete = false;
          break;
        }
        try {
          state = step(sys, played, state, noise, rng);
        } catch (const NumericOverflowError& e) {
          trace.diverged = true;
          trace.divergence_reason = e.what();
          overflow = true;
          break;
        }
        trace.costs.push_back(state.cost_last);
        trace.epoch_of.push_back(j);
        trace.subepoch_of.push_back(static_cast<long>(i));
        ++t;
        c_final = state.cost_last;
      }
      if (overflow) break;
      // A sub-epoch cut by the horizon never observed its final round and
      // contributes no gradient sample.
      if (complete) {
        final_costs.push_back(c_final);
        dirs.push_back(U);
      }
    }

    rec.m_realized = static_cast<long>(final_costs.size());
    rec.final_costs = final_costs;
    if (!final_costs.empty()) {
      rec.g = one_point_estimate(final_costs, dirs, r_j);
      rec.grad_est_norm = rec.g.norm();
      const double dot = (rec.g.array() * grad_true.array()).sum();
      const double denom = rec.g.norm() * grad_true.norm();
      rec.grad_angle_deg =
          denom > 0.0 ? std::acos(std::clamp(dot / denom, -1.0, 1.0)) * 180.0 / M_PI : 0.0;
      K -= sched.eta * rec.g;
    } else {
      rec.g = Matrix::Zero(sys.du(), sys.dx());
    }
    trace.epochs.push_back(std::move(rec));
    if (overflow) break;
  }
  trace.K_final = K;
  return trace;
}

}  // namespace lqrpg
