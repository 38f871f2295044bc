#include "trp/propagator.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

using namespace trp;
using Catch::Approx;

namespace {

double sup_norm(const Vec2& a, const Vec2& b) { return (a - b).cwiseAbs().maxCoeff(); }

double zero_twist_transition(double lambda, double tau0) {
  return propagate_amplitudes(SweepParams{lambda, 0.0, 4, tau0}, Level::kMinus, {}, false)
      .transition_probability;
}

}  // namespace

TEST_CASE("amplitude propagation conserves the norm", "[propagator]") {
  for (const SweepParams& s : {SweepParams{5.8511, 2.928e-4, 4, 160.0}, SweepParams{2.0, -1e-3, 4, 80.0},
                               SweepParams{9.0, 0.3, 3, 20.0}}) {
    const Trajectory tr = propagate_amplitudes(s, Level::kMinus);
    CHECK(tr.stats.max_norm_drift < 1e-9);
    CHECK(std::abs(tr.final_amplitudes.norm2() - 1.0) < 1e-9);
    for (const AmplitudePair& a : tr.amplitudes) CHECK(std::abs(a.norm2() - 1.0) < 1e-9);
  }
}

TEST_CASE("trajectory covers the sweep window", "[propagator]") {
  const SweepParams s{5.8511, 2.928e-4, 4, 80.0};
  const Trajectory tr = propagate_amplitudes(s, Level::kMinus);
  REQUIRE(tr.taus.size() == tr.amplitudes.size());
  REQUIRE(tr.taus.size() > 2);
  CHECK(tr.taus.front() == -40.0);
  CHECK(tr.taus.back() == 40.0);
  CHECK(std::is_sorted(tr.taus.begin(), tr.taus.end()));
  CHECK(std::adjacent_find(tr.taus.begin(), tr.taus.end()) == tr.taus.end());
  CHECK(tr.transition_probability == std::norm(tr.amplitudes.back().I));

  std::ostringstream os;
  write_csv(os, tr);
  CHECK(os.str().rfind("tau,re_S,im_S,re_I,im_I,prob_plus\n", 0) == 0);
}

TEST_CASE("zero-twist transition probability approaches the Landau-Zener value",
          "[propagator][landau-zener]") {
  const double lambda = 5.8511;
  const double lz = std::exp(-kPi / lambda);
  CHECK(lz == Approx(0.5846).margin(1e-4));
  const double p40 = zero_twist_transition(lambda, 40.0);
  const double p80 = zero_twist_transition(lambda, 80.0);
  const double p160 = zero_twist_transition(lambda, 160.0);
  CHECK(std::abs(p80 - lz) < 2e-2);
  CHECK(std::abs(p160 - lz) < 2e-2);
  CHECK(std::abs(p160 - lz) < std::abs(p80 - lz));
  CHECK(std::abs(p80 - lz) < std::abs(p40 - lz));
}

TEST_CASE("zero-twist sweep is symmetric under eta -> -eta", "[propagator][landau-zener]") {
  const SweepParams a{5.8511, 0.0, 4, 80.0};
  SweepParams b = a;
  b.eta = -0.0;
  CHECK(propagate_amplitudes(a, Level::kMinus, {}, false).transition_probability ==
        propagate_amplitudes(b, Level::kMinus, {}, false).transition_probability);
}

TEST_CASE("NOT sweep follows the levels adiabatically and flips the qubit", "[propagator]") {
  const SweepParams s{7.3205, 2.9277e-4, 4, 160.0};
  const Trajectory tr = propagate_amplitudes(s, Level::kMinus, {}, false);
  // Eigenlevel occupation is kept; E- at the start is |0>-like, at the end |1>-like.
  CHECK(tr.transition_probability < 1e-5);
  // |0> is E- at the start only up to a mixing angle of order 1 / tau0, so the
  // computational flip is close to, not at, the eigenlevel value.
  const Vec2 out = propagate_direct(s, Vec2(1.0, 0.0));
  CHECK(std::norm(out(1)) > 0.9997);
  CHECK(std::norm(out(1)) < 1.0);
}

TEST_CASE("slow sweeps are adiabatic", "[propagator]") {
  // lambda = hbar a / b^2 small means a slow sweep.
  const SweepParams s{0.3, 0.0, 4, 80.0};
  const Vec2 start = eigenbasis(s, s.tau_start()).minus;
  const Vec2 end = propagate_direct(s, start);
  CHECK(std::abs(eigenbasis(s, s.tau_end()).minus.dot(end)) > 0.999);
}

TEST_CASE("zero-duration sweep is the identity evolution", "[propagator]") {
  const SweepParams s{5.8511, 2.928e-4, 4, 0.0};
  const Vec2 zero(1.0, 0.0);
  CHECK(sup_norm(propagate_direct(s, zero), zero) == 0.0);
  const Trajectory tr = propagate_amplitudes(s, Level::kMinus);
  CHECK(tr.taus.size() == 1);
  CHECK(tr.transition_probability == 0.0);
  // Endpoint labelling: at tau = 0 the level pair is crossed, so the gate is NOT.
  const Unitary2 u = assemble_unitary(s);
  CHECK((u.matrix() - pauli::x()).norm() < 1e-15);
}

TEST_CASE("eigenbasis reconstruction equals direct propagation", "[propagator][oracle]") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (const SweepParams& s : {SweepParams{5.8511, 2.928e-4, 4, 160.0}, SweepParams{3.3, -4e-4, 4, 80.0},
                               SweepParams{8.0, 2e-3, 3, 40.0}}) {
    for (int k = 0; k < 3; ++k) {
      Vec2 psi(Complex(g(rng), g(rng)), Complex(g(rng), g(rng)));
      psi.normalize();
      const Trajectory tr = propagate_amplitudes(s, amplitudes_at_start(s, psi), {}, false);
      const Vec2 via_frame = reconstruct_state(s, s.tau_end(), tr.final_amplitudes);
      const Vec2 direct = propagate_direct(s, psi);
      CHECK(sup_norm(via_frame, direct) < 1e-8);
    }
  }
}

TEST_CASE("oracle equivalence over randomized sweeps", "[propagator][oracle]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lam(2.0, 10.0), eta(-1e-3, 1e-3);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const SweepParams s{lam(rng), eta(rng), 4, 80.0};
    for (Level lv : {Level::kMinus, Level::kPlus}) {
      const Eigenbasis b0 = eigenbasis(s, s.tau_start());
      const Vec2 psi = lv == Level::kMinus ? b0.minus : b0.plus;
      const Trajectory tr = propagate_amplitudes(s, lv, {}, false);
      worst = std::max(worst, sup_norm(reconstruct_state(s, s.tau_end(), tr.final_amplitudes),
                                       propagate_direct(s, psi)));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(worst < 1e-8);
  CHECK(secs < 60.0);
}

TEST_CASE("realized gates are unitary", "[propagator]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lam(2.0, 10.0), eta(-1e-3, 1e-3);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Unitary2 u = assemble_unitary(SweepParams{lam(rng), eta(rng), 4, 80.0});
    worst = std::max(worst, u.defect());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("Hadamard sweep reproduces the printed gate", "[propagator][reference]") {
  const Unitary2 u = assemble_unitary(SweepParams{5.8511, 2.9280e-4, 4, 160.0});
  CHECK(u(0, 0).real() == Approx(0.708581).margin(1e-6));
  CHECK(u(0, 1).real() == Approx(0.705629).margin(1e-6));
  CHECK(u(1, 0).real() == Approx(0.705629).margin(1e-6));
  CHECK(u(1, 1).real() == Approx(-0.708581).margin(1e-6));
  CHECK(u(0, 1).imag() == Approx(-0.144317e-4).margin(1e-8));
  CHECK(u(1, 0).imag() == Approx(0.144317e-4).margin(1e-8));
  CHECK(std::abs(u(0, 0).imag()) < 1e-8);
}

TEST_CASE("NOT sweep reproduces the printed off-diagonal magnitude", "[propagator][reference]") {
  const Unitary2 u = assemble_unitary(SweepParams{7.3205, 2.9277e-4, 4, 160.0});
  CHECK(std::abs(u(0, 1)) == Approx(0.999997).margin(1e-6));
  CHECK(u(0, 0).real() == Approx(0.235039e-2).margin(1e-7));
}

TEST_CASE("matrix layouts are transposes of each other", "[propagator]") {
  const SweepParams s{5.975, 3.806e-4, 4, 160.0};
  const Unitary2 printed = assemble_unitary(s, {}, MatrixLayout::kPrinted);
  const Unitary2 rows = assemble_unitary(s, {}, MatrixLayout::kOutputRows);
  CHECK((printed.matrix() - rows.matrix().transpose()).norm() == 0.0);
}

TEST_CASE("even-order sweeps give the symmetric gate form", "[propagator]") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> lam(2.0, 10.0), eta(-1e-3, 1e-3);
  for (int k = 0; k < 10; ++k) {
    const Unitary2 u = assemble_unitary(SweepParams{lam(rng), eta(rng), 4, 80.0});
    CHECK(std::abs(u(0, 1) - std::conj(u(1, 0))) < 1e-8);
    CHECK(std::abs(u(1, 1) + std::conj(u(0, 0))) < 1e-8);
  }
}

TEST_CASE("halving tolerances leaves the Hadamard Tr P stable", "[propagator]") {
  const SweepParams s{5.8511, 2.9280e-4, 4, 160.0};
  Mat2 h;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  const Tolerances base;
  const double a = (assemble_unitary(s, base).matrix() - h).squaredNorm();
  const double b = (assemble_unitary(s, base.halved()).matrix() - h).squaredNorm();
  CHECK(std::abs(a - b) < 0.1 * a);
}

TEST_CASE("integrator failures are reported", "[propagator][errors]") {
  const SweepParams s{5.8511, 2.928e-4, 4, 80.0};
  CHECK_THROWS_AS(propagate_amplitudes(s, Level::kMinus, Tolerances{1e-30, 1e-32, 1e-9}), StepUnderflowError);
  CHECK_THROWS_AS(propagate_amplitudes(s, Level::kMinus, Tolerances{1e-3, 1e-3, 1e-9}), NormDriftError);
  CHECK_THROWS_AS(propagate_amplitudes(s, Level::kMinus, Tolerances{-1.0, 1e-14, 1e-9}), std::invalid_argument);
  CHECK_THROWS_AS(propagate_direct(s, Vec2(1.0, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(propagate_amplitudes(s, AmplitudePair{{1.0, 0.0}, {1.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("propagation is deterministic", "[propagator]") {
  const SweepParams s{6.015, 8.1464e-4, 4, 160.0};
  CHECK((assemble_unitary(s).matrix() - assemble_unitary(s).matrix()).norm() == 0.0);
}
