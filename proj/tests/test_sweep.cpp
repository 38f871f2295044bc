#include "trp/sweep.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace trp;
using Catch::Approx;

namespace {

SweepParams quartic(double lambda, double eta, double tau0 = 80.0) {
  return SweepParams{lambda, eta, 4, tau0};
}

// Independent oracle: bracket sign changes of the residual on a grid, then
// polish with TOMS 748.
std::vector<double> residual_roots(const SweepParams& s, double reach) {
  auto f = [&](double t) { return resonance_residual(s, t); };
  std::vector<double> roots;
  const int n = 6001;
  const double lo = -reach * 1.0001, hi = reach * 1.0003;  // asymmetric: no grid point at 0
  double t_prev = lo, f_prev = f(lo);
  for (int k = 1; k <= n; ++k) {
    const double t = lo + (hi - lo) * k / n;
    const double ft = f(t);
    if (ft == 0.0) {
      roots.push_back(t);
    } else if (f_prev != 0.0 && (f_prev < 0) != (ft < 0)) {
      boost::uintmax_t iters = 200;
      auto [a, b] = boost::math::tools::toms748_solve(
          f, t_prev, t, f_prev, ft, boost::math::tools::eps_tolerance<double>(52), iters);
      roots.push_back(0.5 * (a + b));
    }
    t_prev = t;
    f_prev = ft;
  }
  return roots;
}

}  // namespace

TEST_CASE("sweep parameters validate", "[sweep]") {
  CHECK_NOTHROW(quartic(5.8511, 2.928e-4).validate());
  CHECK_THROWS_AS(quartic(0.0, 1e-4).validate(), std::invalid_argument);
  CHECK_THROWS_AS(quartic(-1.0, 1e-4).validate(), std::invalid_argument);
  CHECK_THROWS_AS((SweepParams{1.0, 0.0, 2, 80.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(quartic(1.0, 0.0, -1.0).validate(), std::invalid_argument);
  CHECK(SweepParams{}.n == 4);
  CHECK(SweepParams{}.tau0 == kReferenceSweepDuration);
}

TEST_CASE("twist phase values", "[sweep]") {
  const SweepParams h = quartic(5.8511, 2.9280e-4);
  CHECK(twist_phase(h, 0.0) == 0.0);
  const double expected = (2.9280e-4 / (2 * 5.8511)) * std::pow(40.0, 4);
  CHECK(twist_phase(h, 40.0) == Approx(expected).epsilon(1e-14));
  CHECK(twist_phase(h, 40.0) == Approx(64.06).margin(0.01));

  const SweepParams cubic{2.0, 0.1, 3, 10.0};
  CHECK(twist_phase(cubic, 3.0) == Approx(0.9).epsilon(1e-14));
}

TEST_CASE("twist phase rejects times outside the window unless clamping", "[sweep]") {
  const SweepParams s = quartic(5.8511, 2.9280e-4);
  CHECK_THROWS_AS(twist_phase(s, 40.5), SweepDomainError);
  CHECK_THROWS_AS(control_field(s, -41.0), SweepDomainError);
  CHECK(twist_phase(s, 55.0, WindowPolicy::kClamp) == twist_phase(s, 40.0));
  CHECK(control_field(s, -55.0, WindowPolicy::kClamp)[2] == -40.0);
}

TEST_CASE("twist phase parity follows the twist order", "[sweep]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> tau(-40.0, 40.0), eta(-1e-3, 1e-3);
  for (int n = 3; n <= 8; ++n) {
    for (int k = 0; k < 50; ++k) {
      const SweepParams s{5.0, eta(rng), n, 80.0};
      const double t = tau(rng);
      const double sign = n % 2 == 0 ? 1.0 : -1.0;
      CHECK(twist_phase(s, -t) == Approx(sign * twist_phase(s, t)).epsilon(1e-14).margin(1e-300));
    }
  }
}

TEST_CASE("twist rate is the derivative of the twist phase", "[sweep]") {
  const SweepParams s = quartic(6.015, 8.1464e-4);
  for (double t : {-37.0, -3.0, 0.5, 12.0, 39.0}) {
    const double h = 1e-5;
    const double fd = (twist_phase(s, t + h) - twist_phase(s, t - h)) / (2 * h);
    CHECK(twist_rate(s, t) == Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("control field values and norm", "[sweep]") {
  const SweepParams s = quartic(5.8511, 2.9280e-4);
  const auto f0 = control_field(s, 0.0);
  CHECK(f0[0] == 1.0);
  CHECK(f0[1] == 0.0);
  CHECK(f0[2] == 0.0);

  const auto fs = control_field(quartic(5.8511, 0.0), -40.0);
  CHECK(fs[0] == 1.0);
  CHECK(fs[1] == 0.0);
  CHECK(fs[2] == -40.0);

  const SweepParams v = quartic(6.0150, 8.1464e-4);
  const double phi = (8.1464e-4 / (2 * 6.0150)) * 1e4;
  CHECK(phi == Approx(0.6772).margin(5e-5));
  const auto f10 = control_field(v, 10.0);
  CHECK(f10[0] == Approx(std::cos(phi)).margin(1e-14));
  CHECK(f10[1] == Approx(std::sin(phi)).margin(1e-14));
  CHECK(f10[2] == 10.0);

  for (double t = -40.0; t <= 40.0; t += 0.37) {
    const auto f = control_field(v, t);
    CHECK(f[0] * f[0] + f[1] * f[1] + f[2] * f[2] == Approx(1.0 + t * t).epsilon(1e-15));
  }
}

TEST_CASE("resonance times for the documented cases", "[sweep][resonance]") {
  const ResonanceSet h = resonance_times(quartic(5.8511, 2.9280e-4));
  REQUIRE(h.times.size() == 3);
  CHECK(h.regime == ResonanceRegime::kPositiveEven);
  CHECK(h.times[0] == Approx(-58.44).margin(0.005));
  CHECK(h.times[1] == 0.0);
  CHECK(h.times[2] == Approx(58.44).margin(0.005));

  const ResonanceSet neg = resonance_times(quartic(5.0, -1e-4));
  REQUIRE(neg.times.size() == 1);
  CHECK(neg.times[0] == 0.0);
  CHECK(neg.regime == ResonanceRegime::kNegativeEven);

  const ResonanceSet odd = resonance_times(SweepParams{5.0, 1e-2, 3, 80.0});
  REQUIRE(odd.times.size() == 2);
  CHECK(odd.times[1] == Approx(100.0).epsilon(1e-14));
  CHECK(odd.regime == ResonanceRegime::kPositiveOdd);

  const ResonanceSet odd_neg = resonance_times(SweepParams{5.0, -0.25, 5, 80.0});
  REQUIRE(odd_neg.times.size() == 2);
  CHECK(odd_neg.times[0] == Approx(-std::cbrt(4.0)).epsilon(1e-14));
  CHECK(odd_neg.regime == ResonanceRegime::kNegativeOdd);

  const ResonanceSet v = resonance_times(quartic(6.0150, 8.1464e-4));
  CHECK(v.times.back() == Approx(35.04).margin(0.005));

  const ResonanceSet flat = resonance_times(quartic(5.0, 0.0));
  REQUIRE(flat.times.size() == 1);
  CHECK(flat.regime == ResonanceRegime::kZeroTwist);
}

TEST_CASE("resonance closed forms match a root finder across the regime grid",
          "[sweep][resonance]") {
  for (int n : {3, 4, 5, 6, 7, 8}) {
    for (double eta : {1e-4, 1e-2, 0.5, -1e-4, -1e-2, -0.5}) {
      const SweepParams s{5.0, eta, n, 80.0};
      const ResonanceSet r = resonance_times(s);
      const double reach = 2.0 * std::pow(1.0 / std::abs(eta), 1.0 / (n - 2));
      const std::vector<double> oracle = residual_roots(s, reach);
      INFO("n=" << n << " eta=" << eta);
      REQUIRE(oracle.size() == r.times.size());
      REQUIRE(static_cast<int>(r.times.size()) == resonance_count(r.regime));
      for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(oracle[i] - r.times[i]) < 1e-10);
    }
  }
}

TEST_CASE("randomized resonance draws satisfy the residual and regime counts",
          "[sweep][resonance]") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> order(3, 8);
  std::uniform_real_distribution<double> eta(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    double e = 0.0;
    while (e == 0.0) e = eta(rng);
    const SweepParams s{4.0, e, order(rng), 80.0};
    const ResonanceSet r = resonance_times(s);
    const bool odd = s.n % 2 != 0;
    const std::size_t expected = e > 0 ? (odd ? 2 : 3) : (odd ? 2 : 1);
    INFO("n=" << s.n << " eta=" << e);
    CHECK(r.times.size() == expected);
    for (double t : r.times) CHECK(std::abs(resonance_residual(s, t)) < 1e-10);
    CHECK(std::is_sorted(r.times.begin(), r.times.end()));
  }
}

TEST_CASE("translation key reproduces the quoted laboratory example", "[sweep][lab]") {
  const double omega1 = 393.0, T0 = 0.041, A = 50000.0;
  const double lambda = 4.0 * A / (omega1 * omega1 * T0);
  CHECK(lambda == Approx(31.58).margin(0.005));

  const SweepParams s{lambda, 4.5e-4, 4, lambda * omega1 * T0 / 2.0};
  const LabSweepParams lab = to_lab(s, omega1, T0, 0.0);
  CHECK(lab.A == Approx(A).epsilon(1e-12));
  CHECK(lab.calB == Approx(2.99e4).epsilon(5e-3));
  CHECK(lab.calB == Approx(4.5e-4 * 2 * A * A * A * T0 / (omega1 * omega1)).epsilon(1e-12));

  // The rounded published lambda lands within its rounding of A.
  const SweepParams rounded{31.58, 4.5e-4, 4, 31.58 * omega1 * T0 / 2.0};
  CHECK(to_lab(rounded, omega1, T0, 0.0).A == Approx(A).epsilon(2e-4));

  const SweepParams back = from_lab(lab);
  CHECK(back.lambda == Approx(lambda).epsilon(1e-12));
  CHECK(back.eta == Approx(4.5e-4).epsilon(1e-12));
  CHECK(back.tau0 == Approx(s.tau0).epsilon(1e-12));
}

TEST_CASE("translation key round trips", "[sweep][lab]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lam(0.5, 50.0), eta(-1e-2, 1e-2), tau(10.0, 400.0),
      w1(10.0, 1e4), w0(0.0, 1e8);
  for (int k = 0; k < 1000; ++k) {
    const SweepParams s{lam(rng), eta(rng), 4, tau(rng)};
    const LabSweepParams lab = to_lab(s, w1(rng), w0(rng));
    const SweepParams b = from_lab(lab);
    CHECK(std::abs(b.lambda - s.lambda) <= 1e-12 * s.lambda);
    CHECK(std::abs(b.eta - s.eta) <= 1e-12 * std::abs(s.eta));
    CHECK(std::abs(b.tau0 - s.tau0) <= 1e-12 * s.tau0);
    CHECK(b.n == 4);

    const LabSweepParams again = to_lab(b, lab.omega1, lab.T0, lab.omega0);
    CHECK(std::abs(again.A - lab.A) <= 1e-12 * lab.A);
    CHECK(std::abs(again.calB - lab.calB) <= 1e-12 * std::abs(lab.calB));
  }
}

TEST_CASE("translation key errors", "[sweep][lab]") {
  const SweepParams cubic{5.0, 1e-3, 3, 80.0};
  CHECK_THROWS_AS(to_lab(cubic, 393.0, 0.0), UnsupportedTwistOrder);
  const SweepParams s{5.0, 1e-4, 4, 80.0};
  CHECK_THROWS_AS(to_lab(s, -1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(to_lab(s, 393.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(to_lab(s, 393.0, 1.0, 0.0), std::invalid_argument);  // inconsistent T0
  CHECK_THROWS_AS(from_lab(LabSweepParams{0.0, 5e4, 1.0, 0.041, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(from_lab(LabSweepParams{393.0, 5e4, 1.0, -0.041, 0.0}), std::invalid_argument);
  CHECK_NOTHROW(from_lab(LabSweepParams{393.0, 5e4, -3e4, 0.041, 0.0}));
}

TEST_CASE("phase programs", "[sweep][lab]") {
  const SweepParams s{31.58, 4.5e-4, 4, 31.58 * 393.0 * 0.041 / 2.0};
  const LabSweepParams lab = to_lab(s, 393.0, 0.041, 2.0e6);
  const double B = quartic_twist_strength(lab);
  const PhaseProgram p = phase_programs(lab, 4, B, 401);
  REQUIRE(p.t.size() == 401);
  CHECK(p.t.front() == Approx(-0.0205));
  CHECK(p.t.back() == Approx(0.0205));
  CHECK(std::is_sorted(p.t.begin(), p.t.end()));

  CHECK(p.t[200] == 0.0);
  CHECK(p.phi_det[200] == 0.0);
  CHECK(p.phi_a[200] == 0.0);

  const double end_diff = p.phi_a.back() - p.phi_det.back();
  CHECK(end_diff == Approx(0.5 * B * std::pow(0.0205, 4)).epsilon(1e-12));
  CHECK(end_diff == Approx(lab.calB / 16.0).epsilon(1e-12));

  for (std::size_t k = 0; k < p.t.size(); ++k) {
    const double t = p.t[k];
    CHECK(p.phi_det[k] == Approx(lab.A / lab.T0 * t * t + lab.omega0 * t).epsilon(1e-12));
    CHECK(p.phi_rf[k] - p.phi_det[k] == Approx(-(p.phi_a[k] - p.phi_det[k])).epsilon(1e-9).margin(1e-12));
    // Nondimensionalized, the twist column is the dimensionless twist phase.
    const double tau = 2.0 * lab.A * t / (lab.omega1 * lab.T0);
    const double twist = p.phi_a[k] - p.phi_det[k];
    CHECK(twist == Approx(twist_phase(s, tau, WindowPolicy::kClamp)).epsilon(1e-9).margin(1e-12));
  }
  CHECK_THROWS_AS(phase_programs(lab, 4, B, 1), std::invalid_argument);
}

TEST_CASE("phase program CSV and JSON forms", "[sweep][io]") {
  const LabSweepParams lab{393.0, 5e4, 3e4, 0.041, 1e6};
  std::ostringstream os;
  write_csv(os, phase_programs(lab, 4, quartic_twist_strength(lab), 3));
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,phi_det,phi_a,phi_rf");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 3);

  nlohmann::json j = lab;
  CHECK(j.contains("cal_b"));
  CHECK(j.contains("omega1"));
  CHECK(j.get<LabSweepParams>() == lab);

  const SweepParams s{5.8511, 2.928e-4, 4, 160.0};
  nlohmann::json js = s;
  CHECK(js.at("tau0") == 160.0);
  CHECK(js.get<SweepParams>() == s);
}
