/* Accelerated nonlinear primal-dual extragradient iteration over an abstract
 * saddle-point problem min_u F_gamma(K(u)) + G(u):
 *
 *   u+   = prox_{tau G}(u - tau gradK(u)* p)
 *   omega, tau+, sigma+  per the acceleration mode
 *   ubar = u+ + omega (u+ - u)
 *   p+   = prox_{sigma+ F*_gamma}(p + sigma+ K(ubar))
 *
 * The schedule keeps tau*sigma pinned to its initial value; per-iteration
 * invariant checks (monotonicity, step-length inequalities, omega range)
 * throw std::logic_error since a violation can only be an implementation bug.
 *
 * A Problem must provide:
 *   mesh                                  Mesh1D
 *   forward(u) -> NodalField              S(u)
 *   k_value(y) -> NodalField              K(u) given y = S(u)
 *   adjoint_gradient(u, y, p) -> ElementField   gradK(u)* p given y = S(u)
 *   prox_primal(u, tau) -> ElementField
 *   prox_dual(r, sigma) -> NodalField
 *   objective(u, y) -> double             J_gamma given y = S(u)
 *   feasibility(y) -> double              constraint violation given y = S(u)
 */
#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdegm/fem1d.hpp"

namespace pdegm {

enum class AccelMode {
  none,         // fixed steps, omega = 1
  accel_g,      // G strongly convex: tau decreasing, sigma increasing
  accel_fstar,  // F* strongly convex: sigma decreasing, tau increasing
};

struct StepSchedule {
  double tau = 1.0;
  double sigma = 1.0;
  double mu = 0.0;
  AccelMode mode = AccelMode::none;
  long accel_iters = std::numeric_limits<long>::max();  // acceleration budget N
  double omega = 1.0;        // extrapolation factor of the last update
  long updates = 0;          // completed schedule updates
  double step_product = 1.0; // tau0 * sigma0, invariant over the run
};

inline StepSchedule make_schedule(double tau0, double sigma0, double mu, AccelMode mode,
                                  long accel_iters = std::numeric_limits<long>::max()) {
  if (!(tau0 > 0.0) || !(sigma0 > 0.0)) {
    throw std::invalid_argument("make_schedule: step sizes must be positive");
  }
  if (!(mu >= 0.0)) throw std::invalid_argument("make_schedule: mu must be nonnegative");
  StepSchedule s;
  s.tau = tau0;
  s.sigma = sigma0;
  s.mu = mu;
  s.mode = mode;
  s.accel_iters = accel_iters;
  s.step_product = tau0 * sigma0;
  return s;
}

/// One schedule update.  omega_i = 1/sqrt(1 + 2 mu tau_i) with tau' = omega tau
/// for accel_g; omega_i = 1/sqrt(1 + 2 mu sigma_i) with sigma' = omega sigma
/// for accel_fstar.  The partner step is derived from the pinned product, and
/// the acceleration freezes after accel_iters updates.
inline StepSchedule schedule_update(StepSchedule s) {
  const bool active = s.mode != AccelMode::none && s.mu > 0.0 && s.updates < s.accel_iters;
  if (!active) {
    s.omega = 1.0;
  } else if (s.mode == AccelMode::accel_g) {
    s.omega = 1.0 / std::sqrt(1.0 + 2.0 * s.mu * s.tau);
    s.tau *= s.omega;
    s.sigma = s.step_product / s.tau;
  } else {
    s.omega = 1.0 / std::sqrt(1.0 + 2.0 * s.mu * s.sigma);
    s.sigma *= s.omega;
    s.tau = s.step_product / s.sigma;
  }
  ++s.updates;
  return s;
}

/// Invariants that the update rules guarantee in exact arithmetic.
inline void check_schedule_transition(const StepSchedule& prev, const StepSchedule& next) {
  if (!(next.omega > 0.0) || !(next.omega <= 1.0)) {
    throw std::logic_error("schedule: omega outside (0, 1]");
  }
  const double drift = std::abs(next.tau * next.sigma - prev.step_product) / prev.step_product;
  if (!(drift <= 1e-12)) throw std::logic_error("schedule: tau*sigma drifted by " + std::to_string(drift));
  const double slack = 1e-9 * (1.0 / prev.tau + 1.0 / next.tau + 1.0 / prev.sigma + 1.0 / next.sigma);
  switch (prev.mode) {
    case AccelMode::none:
      if (next.tau != prev.tau || next.sigma != prev.sigma) {
        throw std::logic_error("schedule: steps changed in mode none");
      }
      break;
    case AccelMode::accel_g:
      if (next.tau > prev.tau || next.sigma < prev.sigma) {
        throw std::logic_error("schedule: monotonicity violated in accel_g");
      }
      if (prev.mu + 1.0 / prev.tau - 1.0 / next.tau < -slack) {
        throw std::logic_error("schedule: step-length inequality violated in accel_g");
      }
      break;
    case AccelMode::accel_fstar:
      if (next.sigma > prev.sigma || next.tau < prev.tau) {
        throw std::logic_error("schedule: monotonicity violated in accel_fstar");
      }
      if (prev.mu + 1.0 / prev.sigma - 1.0 / next.sigma < -slack) {
        throw std::logic_error("schedule: step-length inequality violated in accel_fstar");
      }
      break;
  }
}

struct IterateRecord {
  long iter = 0;
  double j_gamma = 0.0;
  double tau = 0.0;    // schedule after the step's update
  double sigma = 0.0;  // dual step actually used
  double omega = 0.0;
  double primal_change = 0.0;  // ||u_new - u_old|| in the element norm
  double feasibility = 0.0;
  double wall_time_ms = 0.0;
};

struct IterateState {
  ElementField u;
  ElementField u_prev;
  NodalField p;
  NodalField y;  // S(u), kept in sync with u
  long iter = 0;
};

struct RunResult {
  std::vector<IterateRecord> records;
  ElementField u;
  NodalField p;
  double j_initial = 0.0;
  double wall_time_ms = 0.0;
};

struct RunHooks {
  std::function<void(const IterateRecord&, const ElementField& u, const NodalField& p)> on_iterate;
};

template <class Problem>
IterateState make_initial_state(const Problem& prob, ElementField u0, NodalField p0) {
  IterateState st;
  st.y = prob.forward(u0);
  st.u = std::move(u0);
  st.u_prev = st.u;
  st.p = std::move(p0);
  return st;
}

/// One iteration: primal prox, schedule update, extrapolation, dual prox.
/// The returned record carries the objective and feasibility at the new
/// iterate; wall_time_ms is filled by run().
template <class Problem>
IterateRecord pdegm_step(IterateState& st, StepSchedule& sched, const Problem& prob) {
  const StepSchedule before = sched;
  const std::size_t n = st.u.size();

  const ElementField z = prob.adjoint_gradient(st.u, st.y, st.p);
  ElementField u_next(n);
  for (std::size_t e = 0; e < n; ++e) u_next[e] = st.u[e] - before.tau * z[e];
  u_next = prob.prox_primal(std::move(u_next), before.tau);

  sched = schedule_update(sched);
  check_schedule_transition(before, sched);

  ElementField u_bar(n);
  for (std::size_t e = 0; e < n; ++e) {
    u_bar[e] = u_next[e] + sched.omega * (u_next[e] - st.u[e]);
  }

  NodalField r = prob.k_value(prob.forward(u_bar));
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = st.p[j] + sched.sigma * r[j];
  NodalField p_next = prob.prox_dual(std::move(r), sched.sigma);

  NodalField y_next = prob.forward(u_next);

  IterateRecord rec;
  rec.iter = st.iter + 1;
  rec.j_gamma = prob.objective(u_next, y_next);
  rec.tau = sched.tau;
  rec.sigma = sched.sigma;
  rec.omega = sched.omega;
  rec.feasibility = prob.feasibility(y_next);
  ElementField diff(n);
  for (std::size_t e = 0; e < n; ++e) diff[e] = u_next[e] - st.u[e];
  rec.primal_change = norm_element(prob.mesh, diff);

  st.u_prev = std::move(st.u);
  st.u = std::move(u_next);
  st.p = std::move(p_next);
  st.y = std::move(y_next);
  ++st.iter;
  return rec;
}

namespace detail {

inline bool all_finite(const std::vector<double>& xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace detail

/// Runs iters steps from (u0, p0) and returns one record per iteration.
/// Aborts with a diagnostic if the objective exceeds 1e6 times its initial
/// value or any iterate stops being finite.
template <class Problem>
RunResult run(const Problem& prob, StepSchedule sched, ElementField u0, NodalField p0, long iters,
              const RunHooks& hooks = {}) {
  if (iters < 1) throw std::invalid_argument("run: need at least one iteration");
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  IterateState st = make_initial_state(prob, std::move(u0), std::move(p0));
  RunResult out;
  out.j_initial = prob.objective(st.u, st.y);
  if (!std::isfinite(out.j_initial)) {
    throw std::runtime_error("run: initial objective is not finite");
  }
  out.records.reserve(static_cast<std::size_t>(iters));

  for (long k = 1; k <= iters; ++k) {
    IterateRecord rec;
    try {
      rec = pdegm_step(st, sched, prob);
    } catch (const SolverError& e) {
      throw std::runtime_error("iteration " + std::to_string(k) + ": " + e.what());
    }
    rec.wall_time_ms = elapsed_ms();
    if (!std::isfinite(rec.j_gamma) || !detail::all_finite(st.p.values) ||
        !detail::all_finite(st.u.values)) {
      throw std::runtime_error("iteration " + std::to_string(k) + ": iterate is not finite");
    }
    if (rec.j_gamma > 1e6 * out.j_initial) {
      throw std::runtime_error("iteration " + std::to_string(k) + ": diverged, J_gamma = " +
                               std::to_string(rec.j_gamma) + " exceeds 1e6 * J_gamma(u0)");
    }
    out.records.push_back(rec);
    if (hooks.on_iterate) hooks.on_iterate(rec, st.u, st.p);
  }
  out.u = std::move(st.u);
  out.p = std::move(st.p);
  out.wall_time_ms = elapsed_ms();
  return out;
}

}  // namespace pdegm
