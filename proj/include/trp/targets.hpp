#pragma once

// Target gates and the composition identities for the phase and pi/8 gates.

#include "trp/linalg.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trp {

enum class GateName { kHadamard, kNot, kVP, kVPi8, kPhase, kPi8, kIdentity };

inline constexpr std::array<GateName, 7> kAllGates = {
    GateName::kHadamard, GateName::kNot, GateName::kVP,       GateName::kVPi8,
    GateName::kPhase,    GateName::kPi8, GateName::kIdentity};

/// Gates produced directly by a single sweep.
inline constexpr std::array<GateName, 4> kSweepGates = {GateName::kHadamard, GateName::kVP,
                                                        GateName::kVPi8, GateName::kNot};

inline std::string_view to_string(GateName g) {
  switch (g) {
    case GateName::kHadamard: return "hadamard";
    case GateName::kNot: return "not";
    case GateName::kVP: return "v_p";
    case GateName::kVPi8: return "v_pi8";
    case GateName::kPhase: return "phase";
    case GateName::kPi8: return "pi8";
    case GateName::kIdentity: return "identity";
  }
  return "?";
}

inline GateName parse_gate_name(std::string_view s) {
  for (GateName g : kAllGates)
    if (to_string(g) == s) return g;
  throw std::invalid_argument("unknown gate '" + std::string(s) +
                              "' (expected hadamard, not, v_p, v_pi8, phase, pi8, identity)");
}

inline bool is_sweep_target(GateName g) {
  for (GateName t : kSweepGates)
    if (t == g) return true;
  return false;
}

inline bool is_composite(GateName g) { return g == GateName::kPhase || g == GateName::kPi8; }

inline Unitary2 target_unitary(GateName g) {
  const double r = 1.0 / std::sqrt(2.0);
  Mat2 m;
  switch (g) {
    case GateName::kHadamard: m << r, r, r, -r; break;
    case GateName::kNot: m << 0, 1, 1, 0; break;
    case GateName::kVP: m << 0, std::polar(1.0, kPi / 4), std::polar(1.0, -kPi / 4), 0; break;
    case GateName::kVPi8: m << 0, std::polar(1.0, kPi / 8), std::polar(1.0, -kPi / 8), 0; break;
    case GateName::kPhase: m << 1, 0, 0, kI; break;
    case GateName::kPi8: m << 1, 0, 0, std::polar(1.0, kPi / 4); break;
    case GateName::kIdentity: m = Mat2::Identity(); break;
  }
  return Unitary2(m);
}

/// U_P = e^{i pi/4} U_NOT V_P and U_pi8 = e^{i pi/8} U_NOT V_pi8.
inline Unitary2 reconstruct_composite(GateName name, const Unitary2& u_not, const Unitary2& v) {
  switch (name) {
    case GateName::kPhase: return std::polar(1.0, kPi / 4) * (u_not * v);
    case GateName::kPi8: return std::polar(1.0, kPi / 8) * (u_not * v);
    default:
      throw std::invalid_argument("reconstruct_composite: '" + std::string(to_string(name)) +
                                  "' is not a composite gate");
  }
}

/// The sweep gate that supplies the V factor of a composite.
inline GateName composite_factor(GateName name) {
  if (name == GateName::kPhase) return GateName::kVP;
  if (name == GateName::kPi8) return GateName::kVPi8;
  throw std::invalid_argument("not a composite gate");
}

}  // namespace trp
