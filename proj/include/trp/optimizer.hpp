#pragma once

// Downhill simplex (Nelder-Mead) search over (lambda, eta) minimizing Tr P.
//
// The simplex lives in coordinates scaled by the magnitude of the initial
// centroid, since lambda ~ 6 and eta ~ 1e-4 differ by several decades.

#include "trp/integrator.hpp"
#include "trp/metrics.hpp"
#include "trp/propagator.hpp"
#include "trp/sweep.hpp"
#include "trp/targets.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace trp {

struct DegenerateSimplexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimplexCoefficients {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  bool operator==(const SimplexCoefficients&) const = default;
};

struct SimplexConfig {
  std::array<SweepParams, 3> vertices{};
  int max_iterations = 500;
  /// 0 means unlimited.
  int max_evaluations = 0;
  double f_tolerance = 1e-10;  // absolute spread of objective values
  double x_tolerance = 1e-8;   // vertex spread in scaled coordinates
  SimplexCoefficients coefficients{};
  int restarts = 0;
  /// Restart simplex edge, as a fraction of the initial simplex extent.
  double restart_fraction = 0.5;
  bool scaled = true;
  int threads = 1;
  Tolerances integrator{};

  /// Simplex around `center` with offsets d_lambda and d_eta along each axis.
  static SimplexConfig around(const SweepParams& center, double d_lambda, double d_eta) {
    SimplexConfig c;
    c.vertices = {center, center, center};
    c.vertices[1].lambda += d_lambda;
    c.vertices[2].eta += d_eta;
    return c;
  }
};

enum class StopReason { kFTolerance, kXTolerance, kMaxIterations, kMaxEvaluations };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kFTolerance: return "f_tolerance";
    case StopReason::kXTolerance: return "x_tolerance";
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kMaxEvaluations: return "max_evaluations";
  }
  return "?";
}

struct OptimizationResult {
  SweepParams best_params;
  double best_tr_p = 0.0;
  int evaluations = 0;
  int iterations = 0;
  int restarts_used = 0;
  std::vector<double> trace;  // best objective after each iteration
  bool converged = false;
  StopReason reason = StopReason::kMaxIterations;
};

using SweepObjective = std::function<double(const SweepParams&)>;

/// Tr P of the realized gate against a target.
inline double objective(const SweepParams& s, GateName target, const Tolerances& tol = {}) {
  return trace_p(assemble_unitary(s, tol), target_unitary(target));
}

namespace detail {

using Point = std::array<double, 2>;

struct Vertex {
  Point x;  // scaled coordinates
  double f;
};

class SimplexRun {
 public:
  SimplexRun(const SimplexConfig& cfg, const SweepObjective& f) : cfg_(cfg), f_(f) {
    const SweepParams& v0 = cfg.vertices[0];
    for (const SweepParams& v : cfg.vertices) {
      if (v.n != v0.n || v.tau0 != v0.tau0)
        throw std::invalid_argument("simplex vertices must share n and tau0");
    }
    template_ = v0;
    scale_ = {1.0, 1.0};
    if (cfg.scaled) {
      for (int k = 0; k < 2; ++k) {
        double c = 0.0, lo = coord(cfg.vertices[0], k), hi = lo;
        for (const SweepParams& v : cfg.vertices) {
          c += coord(v, k) / 3.0;
          lo = std::min(lo, coord(v, k));
          hi = std::max(hi, coord(v, k));
        }
        // A centroid at zero has no magnitude to borrow; fall back to the spread.
        // Rounded to a power of two so scaling round-trips exactly.
        const double m = std::abs(c) > 0.0 ? std::abs(c) : (hi > lo ? hi - lo : 1.0);
        scale_[k] = std::exp2(std::round(std::log2(m)));
      }
    }
  }

  OptimizationResult run() {
    OptimizationResult res;
    std::array<Point, 3> start;
    for (int i = 0; i < 3; ++i) start[i] = to_scaled(cfg_.vertices[i]);
    const double area = simplex_area(start);
    if (!(area > kMinArea)) throw DegenerateSimplexError("initial simplex is degenerate");
    Point extent{0.0, 0.0};
    for (int k = 0; k < 2; ++k) {
      double lo = start[0][k], hi = lo;
      for (const Point& p : start) lo = std::min(lo, p[k]), hi = std::max(hi, p[k]);
      extent[k] = hi - lo;
    }

    std::array<Vertex, 3> simplex = evaluate_all(start, res);
    bool stop = false;
    for (int round = 0; round <= cfg_.restarts && !stop; ++round) {
      if (round > 0) {
        // Re-seed a shrunk simplex around the incumbent.
        const double frac = std::pow(cfg_.restart_fraction, round);
        const Point b = simplex[0].x;
        std::array<Point, 3> seed = {b, Point{b[0] + frac * extent[0], b[1]},
                                     Point{b[0], b[1] + frac * extent[1]}};
        const double best_f = simplex[0].f;
        std::array<Vertex, 3> fresh = evaluate_all({seed[1], seed[2], seed[2]}, res, 2);
        simplex = {Vertex{b, best_f}, fresh[0], fresh[1]};
        res.restarts_used = round;
      }
      stop = iterate(simplex, res);
    }
    sort(simplex);
    res.best_params = from_scaled(simplex[0].x);
    res.best_tr_p = simplex[0].f;
    return res;
  }

 private:
  static constexpr double kMinArea = 1e-18;

  static double coord(const SweepParams& s, int k) { return k == 0 ? s.lambda : s.eta; }

  Point to_scaled(const SweepParams& s) const {
    return {s.lambda / scale_[0], s.eta / scale_[1]};
  }
  SweepParams from_scaled(const Point& p) const {
    SweepParams s = template_;
    s.lambda = p[0] * scale_[0];
    s.eta = p[1] * scale_[1];
    return s;
  }

  static double simplex_area(const std::array<Point, 3>& p) {
    return 0.5 * std::abs((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) -
                          (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
  }
  static double simplex_area(const std::array<Vertex, 3>& v) {
    return simplex_area(std::array<Point, 3>{v[0].x, v[1].x, v[2].x});
  }

  static void sort(std::array<Vertex, 3>& v) {
    std::stable_sort(v.begin(), v.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  }

  bool budget_left(const OptimizationResult& res, int needed = 1) const {
    return cfg_.max_evaluations <= 0 || res.evaluations + needed <= cfg_.max_evaluations;
  }

  double eval(const Point& p, OptimizationResult& res) {
    ++res.evaluations;
    return f_(from_scaled(p));
  }

  /// Evaluates the first `count` points; concurrently when threads > 1.
  /// Results are stored in input order.
  std::array<Vertex, 3> evaluate_all(const std::array<Point, 3>& pts, OptimizationResult& res,
                                     int count = 3) {
    std::array<Vertex, 3> out{};
    if (cfg_.threads > 1) {
      std::array<std::future<double>, 3> fut;
      for (int i = 0; i < count; ++i) {
        const SweepParams s = from_scaled(pts[i]);
        fut[i] = std::async(std::launch::async, [this, s] { return f_(s); });
      }
      for (int i = 0; i < count; ++i) out[i] = {pts[i], fut[i].get()};
      res.evaluations += count;
    } else {
      for (int i = 0; i < count; ++i) out[i] = {pts[i], eval(pts[i], res)};
    }
    return out;
  }

  bool converged(const std::array<Vertex, 3>& v, OptimizationResult& res) const {
    if (v[2].f - v[0].f <= cfg_.f_tolerance) {
      res.converged = true;
      res.reason = StopReason::kFTolerance;
      return true;
    }
    double spread = 0.0;
    for (int i = 1; i < 3; ++i)
      for (int k = 0; k < 2; ++k) spread = std::max(spread, std::abs(v[i].x[k] - v[0].x[k]));
    if (spread <= cfg_.x_tolerance) {
      res.converged = true;
      res.reason = StopReason::kXTolerance;
      return true;
    }
    return false;
  }

  /// Runs Nelder-Mead iterations; returns true when the whole search should
  /// stop (budget exhausted), false when it converged and may restart.
  bool iterate(std::array<Vertex, 3>& v, OptimizationResult& res) {
    const SimplexCoefficients& c = cfg_.coefficients;
    res.converged = false;
    for (;;) {
      sort(v);
      if (converged(v, res)) return false;
      if (res.iterations >= cfg_.max_iterations) {
        res.reason = StopReason::kMaxIterations;
        return true;
      }
      if (!budget_left(res, 2)) {
        res.reason = StopReason::kMaxEvaluations;
        return true;
      }
      if (!(simplex_area(v) > kMinArea))
        throw DegenerateSimplexError("simplex collapsed before convergence (area " +
                                     std::to_string(simplex_area(v)) + ")");

      const Point cen{0.5 * (v[0].x[0] + v[1].x[0]), 0.5 * (v[0].x[1] + v[1].x[1])};
      auto along = [&](double t) {  // cen + t (cen - worst)
        return Point{cen[0] + t * (cen[0] - v[2].x[0]), cen[1] + t * (cen[1] - v[2].x[1])};
      };

      const Point xr = along(c.reflection);
      const double fr = eval(xr, res);
      if (fr < v[0].f) {
        const Point xe = along(c.reflection * c.expansion);
        const double fe = eval(xe, res);
        v[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      } else if (fr < v[1].f) {
        v[2] = {xr, fr};
      } else {
        bool accepted = false;
        if (fr < v[2].f) {
          const Point xc = along(c.reflection * c.contraction);
          const double fc = eval(xc, res);
          if (fc <= fr) v[2] = {xc, fc}, accepted = true;
        } else {
          const Point xcc = along(-c.contraction);
          const double fcc = eval(xcc, res);
          if (fcc < v[2].f) v[2] = {xcc, fcc}, accepted = true;
        }
        if (!accepted) {
          if (!budget_left(res, 2)) {
            res.reason = StopReason::kMaxEvaluations;
            ++res.iterations;
            sort(v);
            res.trace.push_back(v[0].f);
            return true;
          }
          std::array<Point, 3> pts;
          for (int i = 1; i < 3; ++i)
            for (int k = 0; k < 2; ++k)
              pts[i - 1][k] = v[0].x[k] + c.shrink * (v[i].x[k] - v[0].x[k]);
          const std::array<Vertex, 3> fresh = evaluate_all(pts, res, 2);
          v[1] = fresh[0];
          v[2] = fresh[1];
        }
      }
      ++res.iterations;
      sort(v);
      res.trace.push_back(v[0].f);
    }
  }

  const SimplexConfig& cfg_;
  const SweepObjective& f_;
  SweepParams template_;
  Point scale_{1.0, 1.0};
};

}  // namespace detail

/// Nelder-Mead over (lambda, eta) for an arbitrary objective.
inline OptimizationResult minimize(const SimplexConfig& config, const SweepObjective& f) {
  if (config.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  const SimplexCoefficients& c = config.coefficients;
  if (!(c.reflection > 0) || !(c.expansion > 1) || !(c.contraction > 0 && c.contraction < 1) ||
      !(c.shrink > 0 && c.shrink < 1))
    throw std::invalid_argument("invalid simplex coefficients");
  return detail::SimplexRun(config, f).run();
}

inline OptimizationResult minimize(const SimplexConfig& config, GateName target) {
  if (!is_sweep_target(target))
    throw std::invalid_argument("gate '" + std::string(to_string(target)) +
                                "' is not produced by a single sweep");
  for (const SweepParams& v : config.vertices) v.validate();
  const Tolerances tol = config.integrator;
  return minimize(config, SweepObjective([target, tol](const SweepParams& s) {
                    return objective(s, target, tol);
                  }));
}

// ---------------------------------------------------------------------------
// JSON config and results ledger

inline void to_json(nlohmann::json& j, const SimplexConfig& c) {
  nlohmann::json verts = nlohmann::json::array();
  for (const SweepParams& v : c.vertices) verts.push_back({v.lambda, v.eta});
  j = nlohmann::json{{"vertices", verts},
                     {"n", c.vertices[0].n},
                     {"tau0", c.vertices[0].tau0},
                     {"max_iterations", c.max_iterations},
                     {"max_evaluations", c.max_evaluations},
                     {"f_tolerance", c.f_tolerance},
                     {"x_tolerance", c.x_tolerance},
                     {"coefficients",
                      {{"reflection", c.coefficients.reflection},
                       {"expansion", c.coefficients.expansion},
                       {"contraction", c.coefficients.contraction},
                       {"shrink", c.coefficients.shrink}}},
                     {"restarts", c.restarts},
                     {"restart_fraction", c.restart_fraction},
                     {"scaled", c.scaled},
                     {"rtol", c.integrator.rtol},
                     {"atol", c.integrator.atol}};
}

/// Accepts vertices as [lambda, eta] pairs or as {"lambda", "eta"} objects.
inline void from_json(const nlohmann::json& j, SimplexConfig& c) {
  c = SimplexConfig{};
  const auto& verts = j.at("vertices");
  if (!verts.is_array() || verts.size() != 3)
    throw std::invalid_argument("simplex config needs exactly 3 vertices");
  const int n = j.value("n", kQuarticTwist);
  const double tau0 = j.value("tau0", kReferenceSweepDuration);
  for (std::size_t i = 0; i < 3; ++i) {
    SweepParams s;
    if (verts[i].is_array()) {
      s.lambda = verts[i].at(0).get<double>();
      s.eta = verts[i].at(1).get<double>();
    } else {
      s.lambda = verts[i].at("lambda").get<double>();
      s.eta = verts[i].contains("eta4") ? verts[i].at("eta4").get<double>()
                                        : verts[i].at("eta").get<double>();
    }
    s.n = n;
    s.tau0 = tau0;
    c.vertices[i] = s;
  }
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.max_evaluations = j.value("max_evaluations", c.max_evaluations);
  c.f_tolerance = j.value("f_tolerance", c.f_tolerance);
  c.x_tolerance = j.value("x_tolerance", c.x_tolerance);
  if (j.contains("coefficients")) {
    const auto& k = j.at("coefficients");
    c.coefficients.reflection = k.value("reflection", 1.0);
    c.coefficients.expansion = k.value("expansion", 2.0);
    c.coefficients.contraction = k.value("contraction", 0.5);
    c.coefficients.shrink = k.value("shrink", 0.5);
  }
  c.restarts = j.value("restarts", c.restarts);
  c.restart_fraction = j.value("restart_fraction", c.restart_fraction);
  c.scaled = j.value("scaled", c.scaled);
  c.integrator.rtol = j.value("rtol", c.integrator.rtol);
  c.integrator.atol = j.value("atol", c.integrator.atol);
}

inline void to_json(nlohmann::json& j, const OptimizationResult& r) {
  j = nlohmann::json{{"best_params", r.best_params},
                     {"best_tr_p", r.best_tr_p},
                     {"evaluations", r.evaluations},
                     {"iterations", r.iterations},
                     {"restarts_used", r.restarts_used},
                     {"converged", r.converged},
                     {"reason", to_string(r.reason)},
                     {"trace", r.trace}};
}

/// One JSON Lines record: target, full config echo and the result.
inline void append_ledger(std::ostream& os, GateName target, const SimplexConfig& cfg,
                          const OptimizationResult& r) {
  nlohmann::json rec{{"target", std::string(to_string(target))}, {"config", cfg}, {"result", r}};
  os << rec.dump() << '\n';
}

}  // namespace trp
