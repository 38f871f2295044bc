#pragma once

// Propagation of the qubit across a sweep.
//
// The eigenbasis route integrates the amplitude equations
//   dS/dtau = -conj(Gamma) e^{-i Delta} I,   dI/dtau = Gamma e^{i Delta} S
// for psi = S e^{-i alpha-} |E-> - I e^{-i alpha+} |E+>. The direct route
// integrates i d(psi)/d(tau) = h(tau) psi / lambda in the computational basis
// and serves as its oracle.

#include "trp/frame.hpp"
#include "trp/integrator.hpp"
#include "trp/io.hpp"
#include "trp/linalg.hpp"
#include "trp/sweep.hpp"

#include <cmath>
#include <ostream>
#include <vector>

namespace trp {

enum class Level { kMinus, kPlus };

struct AmplitudePair {
  Complex S{1.0, 0.0};  // on |E->
  Complex I{0.0, 0.0};  // on |E+>, with the minus sign of the expansion
  double norm2() const { return std::norm(S) + std::norm(I); }
};

/// Initial amplitudes for a start in one instantaneous level.
inline AmplitudePair start_amplitudes(Level level) {
  return level == Level::kMinus ? AmplitudePair{{1.0, 0.0}, {0.0, 0.0}}
                                : AmplitudePair{{0.0, 0.0}, {-1.0, 0.0}};
}

struct Trajectory {
  std::vector<double> taus;
  std::vector<AmplitudePair> amplitudes;
  AmplitudePair final_amplitudes;
  /// |I|^2 at the end of the sweep.
  double transition_probability = 0.0;
  IntegrationStats stats;
};

/// Step-size guard around every resonance time.
inline StepGuard resonance_guard(const SweepParams& s) {
  StepGuard g;
  g.centers = resonance_times(s).times;
  return g;
}

namespace detail {

inline State4 pack(const AmplitudePair& a) { return {a.S.real(), a.S.imag(), a.I.real(), a.I.imag()}; }
inline AmplitudePair unpack_amplitudes(const State4& x) { return {{x[0], x[1]}, {x[2], x[3]}}; }
inline State4 pack(const Vec2& v) { return {v(0).real(), v(0).imag(), v(1).real(), v(1).imag()}; }
inline Vec2 unpack_state(const State4& x) { return Vec2(Complex(x[0], x[1]), Complex(x[2], x[3])); }

class AmplitudeSystem {
 public:
  explicit AmplitudeSystem(const SweepParams& s) : s_(s), phases_(s) {}

  void operator()(const State4& x, State4& dxdt, double tau) const {
    const Complex S(x[0], x[1]);
    const Complex I(x[2], x[3]);
    const FrameQuantities f = frame_quantities_unchecked(s_, tau);
    const Complex rot = std::polar(1.0, phases_.big_delta(tau));
    const Complex dS = -std::conj(f.gamma_coupling) * std::conj(rot) * I;
    const Complex dI = f.gamma_coupling * rot * S;
    dxdt = {dS.real(), dS.imag(), dI.real(), dI.imag()};
  }

 private:
  SweepParams s_;
  PhaseIntegrator phases_;
};

class DirectSystem {
 public:
  explicit DirectSystem(const SweepParams& s) : s_(s) {}

  void operator()(const State4& x, State4& dxdt, double tau) const {
    const Complex a(x[0], x[1]);
    const Complex b(x[2], x[3]);
    const Complex ph = std::polar(1.0, twist_phase_unchecked(s_, tau));
    const Complex scale(0.0, -1.0 / s_.lambda);
    const Complex da = scale * (tau * a + std::conj(ph) * b);
    const Complex db = scale * (ph * a - tau * b);
    dxdt = {da.real(), da.imag(), db.real(), db.imag()};
  }

 private:
  SweepParams s_;
};

}  // namespace detail

inline Trajectory propagate_amplitudes(const SweepParams& s, const AmplitudePair& initial,
                                       const Tolerances& tol = {}, bool record = true) {
  s.validate();
  if (std::abs(initial.norm2() - 1.0) > 1e-12)
    throw std::invalid_argument("initial amplitudes must be normalized");
  Trajectory tr;
  State4 x = detail::pack(initial);
  auto observe = [&](const State4& st, double tau) {
    if (!record) return;
    tr.taus.push_back(tau);
    tr.amplitudes.push_back(detail::unpack_amplitudes(st));
  };
  tr.stats = integrate_guarded(detail::AmplitudeSystem(s), x, s.tau_start(), s.tau_end(), tol,
                               resonance_guard(s), observe);
  tr.final_amplitudes = detail::unpack_amplitudes(x);
  tr.transition_probability = std::norm(tr.final_amplitudes.I);
  return tr;
}

inline Trajectory propagate_amplitudes(const SweepParams& s, Level start_level,
                                       const Tolerances& tol = {}, bool record = true) {
  return propagate_amplitudes(s, start_amplitudes(start_level), tol, record);
}

/// Fixed-basis propagation of a computational-basis state vector.
inline Vec2 propagate_direct(const SweepParams& s, const Vec2& initial, const Tolerances& tol = {},
                             IntegrationStats* stats = nullptr) {
  s.validate();
  if (std::abs(initial.squaredNorm() - 1.0) > 1e-12)
    throw std::invalid_argument("initial state must be normalized");
  State4 x = detail::pack(initial);
  const IntegrationStats st = integrate_guarded(detail::DirectSystem(s), x, s.tau_start(),
                                                s.tau_end(), tol, resonance_guard(s));
  if (stats) *stats = st;
  return detail::unpack_state(x);
}

/// psi(tau) from eigenbasis amplitudes.
inline Vec2 reconstruct_state(const SweepParams& s, double tau, const AmplitudePair& a) {
  const Eigenbasis b = eigenbasis_unchecked(s, tau);
  const PhaseIntegrals p = PhaseIntegrator(s)(tau);
  return a.S * std::polar(1.0, -p.alpha_minus) * b.minus -
         a.I * std::polar(1.0, -p.alpha_plus) * b.plus;
}

/// Amplitudes at the start of the sweep for a computational-basis state.
inline AmplitudePair amplitudes_at_start(const SweepParams& s, const Vec2& psi) {
  const Eigenbasis b = eigenbasis_unchecked(s, s.tau_start());
  return {b.minus.dot(psi), -b.plus.dot(psi)};  // dot() conjugates its left operand
}

/// Orientation of the realized gate matrix.
enum class MatrixLayout {
  /// Row r holds the image of input state r (the layout of the published
  /// gate matrices).
  kPrinted,
  /// Row r holds output component r (the usual operator layout).
  kOutputRows,
};

/// Realized gate U_a. Logical |0> is the negative-energy level at the start
/// and the positive-energy level at the end of the sweep; logical |1> is the
/// opposite pair. All dynamical and geometric phases are kept.
inline Unitary2 assemble_unitary(const SweepParams& s, const Tolerances& tol = {},
                                 MatrixLayout layout = MatrixLayout::kPrinted) {
  s.validate();
  const PhaseIntegrals end = PhaseIntegrator(s)(s.tau_end());
  const Complex ep = std::polar(1.0, -end.alpha_plus);
  const Complex em = std::polar(1.0, -end.alpha_minus);
  Mat2 m;  // m(out, in)
  const Level inputs[2] = {Level::kMinus, Level::kPlus};
  for (int j = 0; j < 2; ++j) {
    const AmplitudePair a = propagate_amplitudes(s, inputs[j], tol, false).final_amplitudes;
    m(0, j) = -a.I * ep;
    m(1, j) = a.S * em;
  }
  return Unitary2(layout == MatrixLayout::kPrinted ? Mat2(m.transpose()) : m);
}

inline void write_csv(std::ostream& os, const Trajectory& tr) {
  os << "tau,re_S,im_S,re_I,im_I,prob_plus\n";
  for (std::size_t k = 0; k < tr.taus.size(); ++k) {
    const AmplitudePair& a = tr.amplitudes[k];
    const double row[] = {tr.taus[k], a.S.real(), a.S.imag(), a.I.real(), a.I.imag(), std::norm(a.I)};
    io::write_row(os, row);
  }
}

}  // namespace trp
