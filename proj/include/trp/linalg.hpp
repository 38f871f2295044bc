#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace trp {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Threshold used to accept a matrix as unitary on construction or as
/// an input to the error metrics.
inline constexpr double kUnitarityGate = 1e-8;

struct NonUnitaryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline double unitarity_defect(const Mat2& m) {
  return (m.adjoint() * m - Mat2::Identity()).norm();
}

/// 2x2 complex matrix known to be unitary to within a tolerance.
///
/// Storage is row-major in the sense of the printed layout: element (r, c)
/// is what a reader sees in row r, column c.
class Unitary2 {
 public:
  Unitary2() : m_(Mat2::Identity()) {}

  explicit Unitary2(const Mat2& m, double tol = kUnitarityGate) : m_(m) {
    const double d = unitarity_defect(m_);
    if (!(d <= tol)) {
      throw NonUnitaryError("matrix is not unitary: ||U^dag U - 1||_F = " +
                            std::to_string(d));
    }
  }

  const Mat2& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  Unitary2 adjoint() const { return Unitary2(m_.adjoint(), kUnitarityGate); }
  Unitary2 transpose() const { return Unitary2(m_.transpose(), kUnitarityGate); }
  double defect() const { return unitarity_defect(m_); }

  friend Unitary2 operator*(const Unitary2& a, const Unitary2& b) {
    return Unitary2(a.m_ * b.m_, kUnitarityGate);
  }
  friend Unitary2 operator*(Complex phase, const Unitary2& u) {
    return Unitary2(phase * u.m_, kUnitarityGate);
  }

 private:
  Mat2 m_;
};

namespace pauli {
inline Mat2 x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}
inline Mat2 y() {
  Mat2 m;
  m << 0, -kI, kI, 0;
  return m;
}
inline Mat2 z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

}  // namespace trp
