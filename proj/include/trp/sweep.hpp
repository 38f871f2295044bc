#pragma once

// Twisted-rapid-passage sweep descriptions.
//
// A sweep is described in dimensionless form by the inversion rate
// lambda = hbar|a|/b^2, the twist strength eta_n, the twist order n and the
// sweep duration tau0; the sweep runs over tau in [-tau0/2, tau0/2] with
// control field F/b = (cos phi, sin phi, tau) and twist phase
// phi(tau) = (2/n)(eta_n/lambda) tau^n.

#include "trp/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace trp {

/// Sweep duration at which the published gate parameters were obtained
/// (tau in [-80, 80]).
inline constexpr double kReferenceSweepDuration = 160.0;
inline constexpr int kQuarticTwist = 4;

struct SweepDomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct UnsupportedTwistOrder : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class WindowPolicy { kStrict, kClamp };

struct SweepParams {
  double lambda = 1.0;
  double eta = 0.0;
  int n = kQuarticTwist;
  double tau0 = kReferenceSweepDuration;

  double tau_start() const { return -0.5 * tau0; }
  double tau_end() const { return 0.5 * tau0; }

  /// Throws std::invalid_argument if the parameters are unphysical.
  /// A zero duration is accepted; it describes the identity evolution.
  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("lambda must be positive, got " + std::to_string(lambda));
    if (!std::isfinite(eta)) throw std::invalid_argument("eta must be finite");
    if (n < 3) throw std::invalid_argument("twist order n must be >= 3, got " + std::to_string(n));
    if (!(tau0 >= 0.0) || !std::isfinite(tau0))
      throw std::invalid_argument("tau0 must be non-negative, got " + std::to_string(tau0));
  }

  bool operator==(const SweepParams&) const = default;
};

namespace detail {

inline double check_window(const SweepParams& s, double tau, WindowPolicy policy) {
  const double lo = s.tau_start();
  const double hi = s.tau_end();
  const double slack = 1e-12 * std::max(1.0, s.tau0);
  if (tau >= lo - slack && tau <= hi + slack) return std::clamp(tau, lo, hi);
  if (policy == WindowPolicy::kClamp) return std::clamp(tau, lo, hi);
  throw SweepDomainError("tau = " + std::to_string(tau) + " outside sweep window [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace detail

/// phi(tau) = (2/n)(eta/lambda) tau^n without the window check.
inline double twist_phase_unchecked(const SweepParams& s, double tau) {
  return (2.0 / s.n) * (s.eta / s.lambda) * std::pow(tau, s.n);
}

/// d(phi)/d(tau) = 2 (eta/lambda) tau^(n-1).
inline double twist_rate(const SweepParams& s, double tau) {
  return 2.0 * (s.eta / s.lambda) * std::pow(tau, s.n - 1);
}

inline double twist_phase(const SweepParams& s, double tau,
                          WindowPolicy policy = WindowPolicy::kStrict) {
  return twist_phase_unchecked(s, detail::check_window(s, tau, policy));
}

/// Dimensionless control field F(tau)/b.
inline std::array<double, 3> control_field(const SweepParams& s, double tau,
                                           WindowPolicy policy = WindowPolicy::kStrict) {
  tau = detail::check_window(s, tau, policy);
  const double phi = twist_phase_unchecked(s, tau);
  return {std::cos(phi), std::sin(phi), tau};
}

// ---------------------------------------------------------------------------
// Resonances

enum class ResonanceRegime {
  kPositiveOdd,   // B > 0, n odd: 2 resonances
  kPositiveEven,  // B > 0, n even: 3 resonances
  kNegativeOdd,   // B < 0, n odd: 2 resonances
  kNegativeEven,  // B < 0, n even: 1 resonance
  kZeroTwist,     // untwisted sweep: 1 resonance
};

inline const char* to_string(ResonanceRegime r) {
  switch (r) {
    case ResonanceRegime::kPositiveOdd: return "B>0, n odd";
    case ResonanceRegime::kPositiveEven: return "B>0, n even";
    case ResonanceRegime::kNegativeOdd: return "B<0, n odd";
    case ResonanceRegime::kNegativeEven: return "B<0, n even";
    case ResonanceRegime::kZeroTwist: return "B=0";
  }
  return "?";
}

/// Expected resonance count for each regime.
inline int resonance_count(ResonanceRegime r) {
  switch (r) {
    case ResonanceRegime::kPositiveOdd:
    case ResonanceRegime::kNegativeOdd: return 2;
    case ResonanceRegime::kPositiveEven: return 3;
    case ResonanceRegime::kNegativeEven:
    case ResonanceRegime::kZeroTwist: return 1;
  }
  return 0;
}

struct ResonanceSet {
  std::vector<double> times;  // ascending
  ResonanceRegime regime = ResonanceRegime::kZeroTwist;
};

/// tau (1 - eta tau^(n-2)); zero exactly at a resonance. Proportional to
/// the z-component of the field seen in the frame co-rotating with the twist.
inline double resonance_residual(const SweepParams& s, double tau) {
  return tau * (1.0 - s.eta * std::pow(tau, s.n - 2));
}

inline ResonanceSet resonance_times(const SweepParams& s) {
  if (s.n < 3) throw std::invalid_argument("twist order n must be >= 3");
  ResonanceSet out;
  out.times.push_back(0.0);
  const bool odd = (s.n % 2) != 0;
  if (s.eta == 0.0) {
    out.regime = ResonanceRegime::kZeroTwist;
    return out;
  }
  const double root = std::pow(1.0 / std::abs(s.eta), 1.0 / (s.n - 2));
  if (s.eta > 0.0) {
    if (odd) {
      out.regime = ResonanceRegime::kPositiveOdd;
      out.times.push_back(root);
    } else {
      out.regime = ResonanceRegime::kPositiveEven;
      out.times.push_back(root);
      out.times.push_back(-root);
    }
  } else {
    if (odd) {
      out.regime = ResonanceRegime::kNegativeOdd;
      out.times.push_back(-root);
    } else {
      out.regime = ResonanceRegime::kNegativeEven;
    }
  }
  std::sort(out.times.begin(), out.times.end());
  return out;
}

// ---------------------------------------------------------------------------
// Laboratory parameters (quartic twist translation key)
//
//   omega1 = 2b/hbar, A = a T0/hbar, calB = B T0^4 / 2,
//   lambda = 4A/(omega1^2 T0), eta4 = calB omega1^2 / (2 A^3 T0),
//   tau0 = a T0 / b = 2A/omega1.

struct LabSweepParams {
  double omega1 = 0.0;
  double A = 0.0;
  double calB = 0.0;
  double T0 = 0.0;
  double omega0 = 0.0;

  bool operator==(const LabSweepParams&) const = default;
};

namespace detail {
inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(name) + " must be positive");
}
}  // namespace detail

inline SweepParams from_lab(const LabSweepParams& lab) {
  detail::require_positive(lab.omega1, "omega1");
  detail::require_positive(lab.T0, "T0");
  detail::require_positive(lab.A, "A");
  SweepParams s;
  s.n = kQuarticTwist;
  s.lambda = 4.0 * lab.A / (lab.omega1 * lab.omega1 * lab.T0);
  s.eta = lab.calB * lab.omega1 * lab.omega1 / (2.0 * lab.A * lab.A * lab.A * lab.T0);
  s.tau0 = 2.0 * lab.A / lab.omega1;
  return s;
}

/// Translation with an explicit inversion time. T0 must agree with the
/// sweep's own duration, tau0 = lambda omega1 T0 / 2.
inline LabSweepParams to_lab(const SweepParams& s, double omega1, double T0, double omega0) {
  if (s.n != kQuarticTwist)
    throw UnsupportedTwistOrder("laboratory translation key is defined for quartic twist only");
  s.validate();
  detail::require_positive(omega1, "omega1");
  detail::require_positive(T0, "T0");
  LabSweepParams lab;
  lab.omega1 = omega1;
  lab.T0 = T0;
  lab.omega0 = omega0;
  lab.A = s.lambda * omega1 * omega1 * T0 / 4.0;
  lab.calB = s.eta * 2.0 * lab.A * lab.A * lab.A * T0 / (omega1 * omega1);
  const double implied_tau0 = 2.0 * lab.A / omega1;
  if (std::abs(implied_tau0 - s.tau0) > 1e-9 * std::max(1.0, s.tau0)) {
    throw std::invalid_argument("T0 = " + std::to_string(T0) + " implies tau0 = " +
                                std::to_string(implied_tau0) + ", sweep has tau0 = " +
                                std::to_string(s.tau0));
  }
  return lab;
}

/// Translation that derives T0 from the sweep duration.
inline LabSweepParams to_lab(const SweepParams& s, double omega1, double omega0) {
  detail::require_positive(omega1, "omega1");
  s.validate();
  return to_lab(s, omega1, 2.0 * s.tau0 / (s.lambda * omega1), omega0);
}

/// Laboratory twist strength B (phase units per second^4) from calB.
inline double quartic_twist_strength(const LabSweepParams& lab) {
  detail::require_positive(lab.T0, "T0");
  return 2.0 * lab.calB / std::pow(lab.T0, 4);
}

// ---------------------------------------------------------------------------
// Phase programs for a generator driving the sweep in the detector frame.

struct PhaseProgram {
  std::vector<double> t;        // seconds, uniform on [-T0/2, T0/2]
  std::vector<double> phi_det;  // a t^2 / hbar + omega0 t
  std::vector<double> phi_a;    // phi_det + (2/n) B t^n
  std::vector<double> phi_rf;   // phi_det - (2/n) B t^n
};

inline PhaseProgram phase_programs(const LabSweepParams& lab, int n, double B, int samples) {
  if (samples < 2) throw std::invalid_argument("phase program needs at least 2 samples");
  if (n < 3) throw std::invalid_argument("twist order n must be >= 3");
  detail::require_positive(lab.T0, "T0");
  const double a_over_hbar = lab.A / lab.T0;
  PhaseProgram p;
  p.t.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    const double t = lab.T0 * (2.0 * k - (samples - 1)) / (2.0 * (samples - 1));
    const double det = a_over_hbar * t * t + lab.omega0 * t;
    const double twist = (2.0 / n) * B * std::pow(t, n);
    p.t.push_back(t);
    p.phi_det.push_back(det);
    p.phi_a.push_back(det + twist);
    p.phi_rf.push_back(det - twist);
  }
  return p;
}

inline void write_csv(std::ostream& os, const PhaseProgram& p) {
  os << "t,phi_det,phi_a,phi_rf\n";
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    const double row[] = {p.t[k], p.phi_det[k], p.phi_a[k], p.phi_rf[k]};
    io::write_row(os, row);
  }
}

// ---------------------------------------------------------------------------
// JSON (snake_case keys)

inline void to_json(nlohmann::json& j, const SweepParams& s) {
  j = nlohmann::json{{"lambda", s.lambda}, {"eta", s.eta}, {"n", s.n}, {"tau0", s.tau0}};
}

inline void from_json(const nlohmann::json& j, SweepParams& s) {
  s = SweepParams{};
  s.lambda = j.at("lambda").get<double>();
  if (j.contains("eta")) s.eta = j.at("eta").get<double>();
  else if (j.contains("eta4")) s.eta = j.at("eta4").get<double>();
  if (j.contains("n")) s.n = j.at("n").get<int>();
  if (j.contains("tau0")) s.tau0 = j.at("tau0").get<double>();
}

inline void to_json(nlohmann::json& j, const LabSweepParams& l) {
  j = nlohmann::json{{"omega1", l.omega1}, {"a", l.A},   {"cal_b", l.calB},
                     {"t0", l.T0},         {"omega0", l.omega0}};
}

inline void from_json(const nlohmann::json& j, LabSweepParams& l) {
  l.omega1 = j.at("omega1").get<double>();
  l.A = j.at("a").get<double>();
  l.calB = j.at("cal_b").get<double>();
  l.T0 = j.at("t0").get<double>();
  l.omega0 = j.value("omega0", 0.0);
}

}  // namespace trp
