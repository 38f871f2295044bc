// Zero-twist sweeps approach the Landau-Zener transition probability exp(-pi/lambda).

#include "trp/trp.hpp"

#include <cmath>
#include <cstdio>

int main() {
  std::printf("%8s %8s %12s %12s\n", "lambda", "tau0", "P(+)", "LZ");
  for (double lambda : {1.0, 2.0, 5.8511, 10.0}) {
    for (double tau0 : {40.0, 80.0, 160.0}) {
      const trp::SweepParams s{lambda, 0.0, trp::kQuarticTwist, tau0};
      const double p = trp::propagate_amplitudes(s, trp::Level::kMinus, {}, false).transition_probability;
      std::printf("%8.4f %8.1f %12.6f %12.6f\n", lambda, tau0, p, std::exp(-trp::kPi / lambda));
    }
  }
}
