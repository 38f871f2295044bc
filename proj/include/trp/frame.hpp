#pragma once

// Instantaneous eigenbasis of h(tau) = cos(phi) sx + sin(phi) sy + tau sz.
//
// Gauge: E+ = (cos(th/2), e^{i phi} sin(th/2)), E- = (sin(th/2), -e^{i phi} cos(th/2))
// with th = arccos(tau/eps), eps = sqrt(1 + tau^2). Both vectors are smooth on
// the whole real line, and th runs from pi to 0 as tau sweeps through zero.

#include "trp/linalg.hpp"
#include "trp/sweep.hpp"

#include <cmath>
#include <utility>

namespace trp {

/// (eps-, eps+) = (-sqrt(1 + tau^2), +sqrt(1 + tau^2)).
inline std::pair<double, double> energies(const SweepParams& s, double tau,
                                          WindowPolicy policy = WindowPolicy::kStrict) {
  tau = detail::check_window(s, tau, policy);
  const double e = std::hypot(1.0, tau);
  return {-e, e};
}

struct Eigenbasis {
  Vec2 plus;
  Vec2 minus;
};

inline Eigenbasis eigenbasis_unchecked(const SweepParams& s, double tau) {
  const double e = std::hypot(1.0, tau);
  // cos(th/2) and sin(th/2) from cos(th) = tau/e without cancellation.
  const double c = std::sqrt(0.5 * (1.0 + tau / e));
  const double sn = std::sqrt(0.5 * (1.0 - tau / e));
  const Complex ph = std::polar(1.0, twist_phase_unchecked(s, tau));
  Eigenbasis b;
  b.plus << c, ph * sn;
  b.minus << sn, -ph * c;
  return b;
}

inline Eigenbasis eigenbasis(const SweepParams& s, double tau,
                             WindowPolicy policy = WindowPolicy::kStrict) {
  return eigenbasis_unchecked(s, detail::check_window(s, tau, policy));
}

/// Dimensionless Hamiltonian h(tau); the Schrodinger equation reads
/// i d(psi)/d(tau) = h psi / lambda.
inline Mat2 hamiltonian(const SweepParams& s, double tau) {
  const Complex ph = std::polar(1.0, twist_phase_unchecked(s, tau));
  Mat2 h;
  h << tau, std::conj(ph), ph, -tau;
  return h;
}

struct FrameQuantities {
  double delta = 0.0;            // 2 eps/lambda - (gammadot_plus - gammadot_minus)
  Complex gamma_coupling{};      // <E+| d/dtau |E->
  double gammadot_minus = 0.0;   // i <E-| d/dtau |E->
  double gammadot_plus = 0.0;    // i <E+| d/dtau |E+>
};

inline FrameQuantities frame_quantities_unchecked(const SweepParams& s, double tau) {
  const double e2 = 1.0 + tau * tau;
  const double e = std::sqrt(e2);
  const double rate = twist_rate(s, tau);
  FrameQuantities f;
  f.gammadot_plus = -0.5 * rate * (1.0 - tau / e);
  f.gammadot_minus = -0.5 * rate * (1.0 + tau / e);
  f.gamma_coupling = Complex(-0.5 / e2, -0.5 * rate / e);
  f.delta = 2.0 * e / s.lambda - (f.gammadot_plus - f.gammadot_minus);
  return f;
}

inline FrameQuantities frame_quantities(const SweepParams& s, double tau,
                                        WindowPolicy policy = WindowPolicy::kStrict) {
  return frame_quantities_unchecked(s, detail::check_window(s, tau, policy));
}

// ---------------------------------------------------------------------------
// Closed-form phase integrals.
//
// alpha+(tau) = int (eps/lambda - gammadot_plus), alpha-(tau) = int (-eps/lambda - gammadot_minus),
// both measured from the start of the sweep, and Delta = alpha+ - alpha- = int delta.

namespace detail {

/// J_k(tau) = int tau^k / sqrt(1 + tau^2) d tau (antiderivative, J_0 = asinh).
inline double moment_integral(int k, double tau) {
  const double e = std::hypot(1.0, tau);
  double jm2 = std::asinh(tau);  // J_0
  if (k == 0) return jm2;
  double jm1 = e;  // J_1
  for (int m = 2; m <= k; ++m) {
    const double j = (std::pow(tau, m - 1) * e - (m - 1) * jm2) / m;
    jm2 = jm1;
    jm1 = j;
  }
  return jm1;
}

}  // namespace detail

struct PhaseIntegrals {
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  double big_delta() const { return alpha_plus - alpha_minus; }
};

class PhaseIntegrator {
 public:
  explicit PhaseIntegrator(const SweepParams& s) : s_(s), start_(raw(s.tau_start())) {}

  PhaseIntegrals operator()(double tau) const {
    const Raw r = raw(tau);
    const double d = r.dyn - start_.dyn;
    const double phi = r.phi - start_.phi;
    const double k = r.geo - start_.geo;
    return {d + 0.5 * (phi - k), -d + 0.5 * (phi + k)};
  }

  /// Delta(tau) alone, used in the right-hand side of the amplitude equations.
  double big_delta(double tau) const {
    const Raw r = raw(tau);
    return 2.0 * (r.dyn - start_.dyn) - (r.geo - start_.geo);
  }

 private:
  struct Raw {
    double dyn;  // int eps / lambda
    double phi;  // twist phase
    double geo;  // int phi' tau / eps
  };

  Raw raw(double tau) const {
    const double e = std::hypot(1.0, tau);
    return {(tau * e + std::asinh(tau)) / (2.0 * s_.lambda), twist_phase_unchecked(s_, tau),
            2.0 * (s_.eta / s_.lambda) * detail::moment_integral(s_.n, tau)};
  }

  SweepParams s_;
  Raw start_;
};

}  // namespace trp
