// Realizes the Hadamard gate with a quartic twist sweep and prints its error bounds.

#include "trp/trp.hpp"

#include <cstdio>

int main() {
  const trp::SweepParams sweep{5.8511, 2.9280e-4, trp::kQuarticTwist, trp::kReferenceSweepDuration};
  const trp::Unitary2 ua = trp::assemble_unitary(sweep);
  const trp::GateErrorReport r = trp::error_report(ua, trp::target_unitary(trp::GateName::kHadamard));

  std::printf("U_a (rows = input state)\n");
  for (int i = 0; i < 2; ++i)
    std::printf("  % .6f%+.6ei   % .6f%+.6ei\n", ua(i, 0).real(), ua(i, 0).imag(), ua(i, 1).real(),
                ua(i, 1).imag());
  std::printf("Tr P      = %.3e\n", r.tr_p);
  std::printf("d*        = %.3e\n", r.d_star);
  std::printf("max P_e   = %.3e over %d Haar states\n", r.sampled_pe_max, r.samples);
  std::printf("fidelity  = %.7f\n", r.fidelity);
}
