#pragma once

// Adaptive stepping shared by the eigenbasis and fixed-basis propagators.
// Boost.Odeint supplies the embedded Runge-Kutta-Fehlberg 7(8) pair and its
// error controller; this loop adds step-underflow detection, a step cap near
// resonances and a per-step norm check.

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace trp {

struct Tolerances {
  double rtol = 1e-12;
  double atol = 1e-14;
  /// Accepted steps whose state norm drifts from 1 by more than this abort.
  double norm_gate = 1e-9;

  void validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0) || !(norm_gate > 0.0))
      throw std::invalid_argument("integrator tolerances must be positive");
  }
  Tolerances halved() const { return {0.5 * rtol, 0.5 * atol, norm_gate}; }
  bool operator==(const Tolerances&) const = default;
};

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepUnderflowError : IntegrationError {
  using IntegrationError::IntegrationError;
};

struct NormDriftError : IntegrationError {
  using IntegrationError::IntegrationError;
};

/// Intervals in which the step size is capped.
struct StepGuard {
  std::vector<double> centers;
  double half_width = 3.0;
  double max_dt = 0.25;

  double cap(double t) const {
    for (double c : centers)
      if (std::abs(t - c) < half_width) return max_dt;
    return std::numeric_limits<double>::infinity();
  }
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double max_norm_drift = 0.0;
};

using State4 = std::array<double, 4>;

namespace detail {

/// Error-per-unit-step control: a step of length dt is accepted when every
/// component's local error is below (atol + rtol |x|) * dt, so the errors
/// committed over a sweep of length L add up to at most about tol * L.
struct PerUnitStepChecker {
  using value_type = double;
  using algebra_type = boost::numeric::odeint::array_algebra;
  using operations_type = boost::numeric::odeint::default_operations;

  double atol;
  double rtol;

  template <class State, class Deriv, class Err, class Time>
  double error(algebra_type&, const State& x_old, const Deriv&, Err& x_err, Time dt) const {
    const double h = std::abs(dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < x_err.size(); ++i)
      worst = std::max(worst, std::abs(x_err[i]) / ((atol + rtol * std::abs(x_old[i])) * h));
    return worst;
  }
};

}  // namespace detail

/// Squared Euclidean norm of a state made of (re, im) pairs.
inline double state_norm2(const State4& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

/// Integrates dx/dt = sys(x, t) from t0 to t1 (t1 >= t0). `observe(x, t)` is
/// called at t0 and after every accepted step.
template <class System, class Observer>
IntegrationStats integrate_guarded(System&& sys, State4& x, double t0, double t1,
                                   const Tolerances& tol, const StepGuard& guard,
                                   Observer&& observe) {
  namespace odeint = boost::numeric::odeint;
  tol.validate();
  if (t1 < t0) throw std::invalid_argument("integrate_guarded: t1 < t0");

  using Stepper = odeint::runge_kutta_fehlberg78<State4>;
  odeint::controlled_runge_kutta<Stepper, detail::PerUnitStepChecker> stepper(
      detail::PerUnitStepChecker{tol.atol, tol.rtol});

  IntegrationStats stats;
  observe(static_cast<const State4&>(x), t0);
  const double span = t1 - t0;
  if (span == 0.0) return stats;

  const double min_dt = 1e-14 * std::max(1.0, std::abs(t0) + std::abs(t1));
  double t = t0;
  double dt = std::min(1e-2, span);
  auto rhs = [&sys](const State4& s, State4& dsdt, double tt) { sys(s, dsdt, tt); };

  std::size_t attempts = 0;
  while (t < t1) {
    double step = std::min({dt, guard.cap(t), t1 - t});
    const bool last = step >= t1 - t;
    if (last) step = t1 - t;
    double t_try = t;
    const auto res = stepper.try_step(rhs, x, t_try, step);
    if (++attempts > 50'000'000) throw IntegrationError("integrator exceeded step budget");
    if (res == odeint::success) {
      t = last ? t1 : t_try;
      ++stats.accepted;
      const double drift = std::abs(state_norm2(x) - 1.0);
      stats.max_norm_drift = std::max(stats.max_norm_drift, drift);
      if (drift > tol.norm_gate) {
        throw NormDriftError("norm drift " + std::to_string(drift) + " at t = " +
                             std::to_string(t));
      }
      observe(static_cast<const State4&>(x), t);
      dt = step;  // the stepper proposes the enlarged size in `step`
    } else {
      ++stats.rejected;
      dt = step;
      if (dt < min_dt) {
        throw StepUnderflowError("step size underflow (" + std::to_string(dt) + ") at t = " +
                                 std::to_string(t) + "; tolerances too tight?");
      }
    }
  }
  return stats;
}

template <class System>
IntegrationStats integrate_guarded(System&& sys, State4& x, double t0, double t1,
                                   const Tolerances& tol, const StepGuard& guard) {
  return integrate_guarded(std::forward<System>(sys), x, t0, t1, tol, guard,
                           [](const State4&, double) {});
}

}  // namespace trp
