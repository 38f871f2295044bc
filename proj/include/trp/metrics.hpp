#pragma once

// Gate error measures: D = U_a - U_t, P = D^dag D, and the bounds
// P_e(psi) <= d* <= Tr P, together with gate and state fidelities.

#include "trp/linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace trp {

inline constexpr std::uint64_t kDefaultSeed = 20050614;
inline constexpr int kDefaultSamples = 1000;

struct GateErrorReport {
  double tr_p = 0.0;
  double d_star = 0.0;
  double fidelity = 1.0;
  double sampled_pe_max = 0.0;
  int samples = 0;
  std::uint64_t seed = kDefaultSeed;
};

inline void to_json(nlohmann::json& j, const GateErrorReport& r) {
  j = nlohmann::json{{"tr_p", r.tr_p},
                     {"d_star", r.d_star},
                     {"fidelity", r.fidelity},
                     {"sampled_pe_max", r.sampled_pe_max},
                     {"samples", r.samples},
                     {"seed", r.seed}};
}

inline Mat2 positive_operator(const Unitary2& ua, const Unitary2& ut) {
  const Mat2 d = ua.matrix() - ut.matrix();
  return d.adjoint() * d;
}

inline double trace_p(const Unitary2& ua, const Unitary2& ut) {
  return (ua.matrix() - ut.matrix()).squaredNorm();
}

/// Largest eigenvalue of a 2x2 Hermitian matrix.
inline double max_eigenvalue(const Mat2& p) {
  const double a = p(0, 0).real();
  const double d = p(1, 1).real();
  const double half_gap = std::hypot(0.5 * (a - d), std::abs(p(0, 1)));
  return 0.5 * (a + d) + half_gap;
}

inline double d_star(const Unitary2& ua, const Unitary2& ut) {
  return std::max(0.0, max_eigenvalue(positive_operator(ua, ut)));
}

/// (1/2) Re Tr(U_a^dag U_t), equal to 1 - Tr P / 4.
inline double gate_fidelity(const Unitary2& ua, const Unitary2& ut) {
  return 0.5 * (ua.matrix().adjoint() * ut.matrix()).trace().real();
}

/// Error probability for input state psi: the weight of D psi outside U_t psi.
inline double state_error(const Unitary2& ua, const Unitary2& ut, const Vec2& psi) {
  if (std::abs(psi.squaredNorm() - 1.0) > 1e-10)
    throw std::invalid_argument("state_error: psi must be a unit vector");
  const Vec2 xi = (ua.matrix() - ut.matrix()) * psi;
  const Vec2 target = ut.matrix() * psi;
  const double pe = xi.squaredNorm() - std::norm(target.dot(xi));
  return std::clamp(pe, 0.0, 1.0);
}

/// Haar-random pure state: a normalized pair of standard complex Gaussians.
template <class Rng>
Vec2 haar_state(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec2 v;
  for (int k = 0; k < 2; ++k) {
    const double re = n01(rng);
    const double im = n01(rng);
    v(k) = Complex(re, im);
  }
  return v / v.norm();
}

inline double sampled_state_error_max(const Unitary2& ua, const Unitary2& ut, int samples,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) worst = std::max(worst, state_error(ua, ut, haar_state(rng)));
  return worst;
}

inline GateErrorReport error_report(const Unitary2& ua, const Unitary2& ut,
                                    int samples = kDefaultSamples,
                                    std::uint64_t seed = kDefaultSeed) {
  if (samples < 0) throw std::invalid_argument("error_report: negative sample count");
  if (!(ua.defect() <= kUnitarityGate) || !(ut.defect() <= kUnitarityGate))
    throw NonUnitaryError("error_report: input is not unitary");
  GateErrorReport r;
  r.tr_p = trace_p(ua, ut);
  r.d_star = d_star(ua, ut);
  r.fidelity = gate_fidelity(ua, ut);
  r.sampled_pe_max = sampled_state_error_max(ua, ut, samples, seed);
  r.samples = samples;
  r.seed = seed;
  return r;
}

/// Raw-matrix entry point: rejects inputs that fail the unitarity gate.
inline GateErrorReport error_report(const Mat2& ua, const Mat2& ut, int samples = kDefaultSamples,
                                    std::uint64_t seed = kDefaultSeed) {
  return error_report(Unitary2(ua), Unitary2(ut), samples, seed);
}

// ---------------------------------------------------------------------------
// Density matrices and state fidelity

struct InvalidDensityMatrix : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class DensityMatrix2 {
 public:
  explicit DensityMatrix2(const Mat2& rho, double tol = 1e-12) : rho_(rho) {
    if ((rho - rho.adjoint()).norm() > tol) throw InvalidDensityMatrix("density matrix not Hermitian");
    if (std::abs(rho.trace() - Complex(1.0, 0.0)) > tol)
      throw InvalidDensityMatrix("density matrix trace differs from 1");
    const double lo = 0.5 * rho.trace().real() -
                      std::hypot(0.5 * (rho(0, 0).real() - rho(1, 1).real()), std::abs(rho(0, 1)));
    if (lo < -tol) throw InvalidDensityMatrix("density matrix has a negative eigenvalue");
  }

  static DensityMatrix2 pure(const Vec2& psi) {
    const Vec2 u = psi / psi.norm();
    return DensityMatrix2(u * u.adjoint());
  }

  const Mat2& matrix() const { return rho_; }
  double det() const { return std::max(0.0, rho_.determinant().real()); }

 private:
  Mat2 rho_;
};

/// Tr sqrt(sqrt(rho) sigma sqrt(rho)). For 2x2 matrices the two eigenvalues of
/// the inner product give (Tr sqrt(M))^2 = Tr(rho sigma) + 2 sqrt(det rho det sigma).
inline double state_fidelity(const DensityMatrix2& rho, const DensityMatrix2& sigma) {
  const double overlap = (rho.matrix() * sigma.matrix()).trace().real();
  const double f2 = overlap + 2.0 * std::sqrt(rho.det() * sigma.det());
  return std::clamp(std::sqrt(std::max(0.0, f2)), 0.0, 1.0);
}

}  // namespace trp
