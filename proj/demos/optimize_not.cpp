// Downhill simplex search for the NOT gate from a seed offset from the published point.

#include "trp/trp.hpp"

#include <cstdio>

int main() {
  const trp::SweepParams seed{7.3305, 3.0277e-4, trp::kQuarticTwist, trp::kReferenceSweepDuration};
  trp::SimplexConfig cfg = trp::SimplexConfig::around(seed, -0.02, -2e-5);
  cfg.max_evaluations = 500;
  const trp::OptimizationResult r = trp::minimize(cfg, trp::GateName::kNot);

  std::printf("best lambda = %.6f\n", r.best_params.lambda);
  std::printf("best eta4   = %.6e\n", r.best_params.eta);
  std::printf("Tr P        = %.3e\n", r.best_tr_p);
  std::printf("evaluations = %d, stop: %s\n", r.evaluations, trp::to_string(r.reason));

  const trp::SensitivityReport s = trp::sensitivity_summary(trp::GateName::kNot, r.best_params);
  std::printf("impact of eta4 steps %.2e vs lambda steps %.2e\n", s.eta_impact, s.lambda_impact);
}
