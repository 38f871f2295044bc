// trp: command-line front end for twisted-rapid-passage gate simulation.
//
// Exit codes: 0 success, 2 usage, 3 numerical failure, 4 degenerate simplex,
// 5 calibration-tier failure in `reproduce`, 6 optimization-tier failure.

#include "trp/trp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kUsage = 2, kNumerical = 3, kDegenerate = 4, kCalibration = 5, kOptimization = 6 };

constexpr const char* kLedgerEnv = "TRP_LEDGER";
constexpr const char* kDefaultLedger = "trp_ledger.jsonl";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool json = false;
  int threads = 1;
};

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_matrix(std::ostream& os, const std::string& label, const trp::Mat2& m) {
  auto block = [&](const char* part, auto get) {
    os << part << "(" << label << ") =\n";
    for (int r = 0; r < 2; ++r) {
      char line[96];
      std::snprintf(line, sizeof line, "  %14s  %14s\n", fmt6(get(m(r, 0))).c_str(),
                    fmt6(get(m(r, 1))).c_str());
      os << line;
    }
  };
  block("Re", [](trp::Complex z) { return z.real(); });
  block("Im", [](trp::Complex z) { return z.imag(); });
}

void emit(const Globals& g, const json& j, const std::string& human) {
  if (g.json) std::cout << j.dump(2) << '\n';
  else std::cout << human;
}

// ---------------------------------------------------------------------------

struct SweepFlags {
  double lambda = 5.8511;
  double eta4 = 2.9280e-4;
  int n = trp::kQuarticTwist;
  double tau0 = trp::kReferenceSweepDuration;

  void add(CLI::App* app) {
    app->add_option("--lambda", lambda, "dimensionless inversion rate")->capture_default_str();
    app->add_option("--eta4,--eta", eta4, "dimensionless twist strength")->capture_default_str();
    app->add_option("--n", n, "twist order")->capture_default_str();
    app->add_option("--tau0", tau0, "sweep duration; the sweep covers [-tau0/2, tau0/2]")
        ->capture_default_str();
  }
  trp::SweepParams sweep() const {
    trp::SweepParams s{lambda, eta4, n, tau0};
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return s;
  }
};

struct TolFlags {
  trp::Tolerances tol;
  void add(CLI::App* app) {
    app->add_option("--rtol", tol.rtol, "integrator relative tolerance")->capture_default_str();
    app->add_option("--atol", tol.atol, "integrator absolute tolerance")->capture_default_str();
  }
};

trp::GateName gate_or_usage(const std::string& s) {
  try {
    return trp::parse_gate_name(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------

int run_simulate(const Globals& g, const SweepFlags& sf, const TolFlags& tf,
                 const std::string& target_name, const std::string& trace_path,
                 const std::string& layout_name, int samples, std::uint64_t seed) {
  const trp::SweepParams s = sf.sweep();
  const trp::GateName target = gate_or_usage(target_name);
  trp::MatrixLayout layout;
  if (layout_name == "printed") layout = trp::MatrixLayout::kPrinted;
  else if (layout_name == "output-rows") layout = trp::MatrixLayout::kOutputRows;
  else throw UsageError("--layout must be 'printed' or 'output-rows'");

  const trp::Unitary2 ua = trp::assemble_unitary(s, tf.tol, layout);
  const trp::GateErrorReport rep = trp::error_report(ua, trp::target_unitary(target), samples, seed);
  const trp::Trajectory tr = trp::propagate_amplitudes(s, trp::Level::kMinus, tf.tol, !trace_path.empty());
  if (!trace_path.empty()) {
    std::ofstream os(trace_path);
    if (!os) throw UsageError("cannot write trace file " + trace_path);
    trp::write_csv(os, tr);
  }

  json j{{"sweep", s},
         {"target", std::string(trp::to_string(target))},
         {"layout", layout_name},
         {"u_a", trp::matrix_json(ua.matrix())},
         {"report", rep},
         {"transition_probability", tr.transition_probability},
         {"accepted_steps", tr.stats.accepted},
         {"max_norm_drift", tr.stats.max_norm_drift}};
  std::ostringstream h;
  h << "sweep: lambda=" << s.lambda << " eta" << s.n << "=" << s.eta << " tau0=" << s.tau0 << "\n";
  print_matrix(h, "U_a", ua.matrix());
  h << "target " << trp::to_string(target) << ": Tr P = " << fmt6(rep.tr_p)
    << ", d* = " << fmt6(rep.d_star) << ", fidelity = " << fmt6(rep.fidelity)
    << ", max sampled P_e = " << fmt6(rep.sampled_pe_max) << " (" << rep.samples << " states)\n";
  h << "transition probability |I|^2 from E-: " << fmt6(tr.transition_probability) << "\n";
  emit(g, j, h.str());
  return kOk;
}

int run_optimize(const Globals& g, const std::string& target_name, const std::string& simplex_path,
                 const SweepFlags& sf, bool have_center, double d_lambda, double d_eta,
                 int max_iter, int max_evals, int restarts, std::string ledger, const TolFlags& tf,
                 bool tol_given) {
  const trp::GateName target = gate_or_usage(target_name);
  if (!trp::is_sweep_target(target))
    throw UsageError("target '" + target_name + "' is not produced by a single sweep");
  trp::SimplexConfig cfg;
  if (!simplex_path.empty()) {
    std::ifstream in(simplex_path);
    if (!in) throw UsageError("cannot open simplex config " + simplex_path);
    try {
      cfg = json::parse(in).get<trp::SimplexConfig>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("bad simplex config: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("bad simplex config: ") + e.what());
    }
  } else if (have_center) {
    cfg = trp::SimplexConfig::around(sf.sweep(), d_lambda, d_eta);
  } else {
    throw UsageError("optimize needs --simplex <config.json> or --lambda/--eta4");
  }
  if (max_iter >= 0) cfg.max_iterations = max_iter;
  if (max_evals >= 0) cfg.max_evaluations = max_evals;
  if (restarts >= 0) cfg.restarts = restarts;
  if (tol_given) cfg.integrator = tf.tol;
  cfg.threads = g.threads;

  const trp::OptimizationResult r = trp::minimize(cfg, target);

  if (ledger.empty()) {
    const char* env = std::getenv(kLedgerEnv);
    ledger = env && *env ? env : kDefaultLedger;
  }
  if (ledger != "-") {
    std::ofstream os(ledger, std::ios::app);
    if (!os) throw UsageError("cannot append to ledger " + ledger);
    trp::append_ledger(os, target, cfg, r);
  }

  json j{{"target", std::string(trp::to_string(target))}, {"config", cfg}, {"result", r}, {"ledger", ledger}};
  std::ostringstream h;
  h << "target " << trp::to_string(target) << "\n"
    << "best lambda = " << trp::io::format_double(r.best_params.lambda)
    << ", eta4 = " << trp::io::format_double(r.best_params.eta) << "\n"
    << "best Tr P = " << fmt6(r.best_tr_p) << " after " << r.evaluations << " evaluations, "
    << r.iterations << " iterations (" << (r.converged ? "converged: " : "stopped: ")
    << trp::to_string(r.reason) << ")\n";
  emit(g, j, h.str());
  return kOk;
}

int run_scan(const Globals& g, const std::string& target_name, const SweepFlags& sf,
             const std::string& vary, const std::string& values, const std::string& out,
             const TolFlags& tf) {
  trp::ScanSpec spec;
  spec.target = gate_or_usage(target_name);
  spec.fixed = sf.sweep();
  try {
    spec.vary = trp::parse_scan_axis(vary);
    spec.values = trp::io::parse_list(values);
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<trp::ScanRow> rows;
  int code = kOk;
  try {
    rows = trp::run_scan(spec, tf.tol, g.threads);
  } catch (const trp::ScanAborted& e) {
    std::cerr << "scan aborted: " << e.what() << " (" << e.rows.size() << " rows kept)\n";
    rows = e.rows;
    code = kNumerical;
  }
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw UsageError("cannot write " + out);
    trp::write_csv(os, rows);
  }
  if (g.json) {
    std::cout << json{{"target", std::string(trp::to_string(spec.target))},
                      {"vary", trp::to_string(spec.vary)},
                      {"rows", rows},
                      {"complete", code == kOk}}
                     .dump(2)
              << '\n';
  } else if (out.empty()) {
    trp::write_csv(std::cout, rows);
  } else {
    std::cout << rows.size() << " rows written to " << out << "\n";
  }
  return code;
}

int run_resonances(const Globals& g, const SweepFlags& sf) {
  trp::SweepParams s{sf.lambda, sf.eta4, sf.n, sf.tau0};
  if (s.n < 3) throw UsageError("twist order n must be >= 3");
  const trp::ResonanceSet r = trp::resonance_times(s);
  json times = json::array();
  std::ostringstream h;
  h << "regime: " << trp::to_string(r.regime) << " (" << r.times.size() << " resonance"
    << (r.times.size() == 1 ? "" : "s") << ")\n";
  for (double t : r.times) {
    const bool inside = t >= s.tau_start() && t <= s.tau_end();
    times.push_back({{"tau", t}, {"inside_window", inside}});
    h << "  tau = " << fmt6(t) << (inside ? "" : "  (outside sweep window)") << "\n";
  }
  emit(g, json{{"regime", trp::to_string(r.regime)}, {"window", {s.tau_start(), s.tau_end()}}, {"times", times}},
       h.str());
  return kOk;
}

struct TranslateFlags {
  double omega1 = 393.0;
  double t0 = 0.0;
  double omega0 = 0.0;
  double a = 0.0;
  double cal_b = 0.0;
  bool from_lab = false;
  std::string program;
  int samples = 201;
};

int run_translate(const Globals& g, const SweepFlags& sf, const TranslateFlags& tf) {
  trp::LabSweepParams lab;
  trp::SweepParams s;
  try {
    if (tf.from_lab) {
      lab = {tf.omega1, tf.a, tf.cal_b, tf.t0, tf.omega0};
      s = trp::from_lab(lab);
    } else {
      s = sf.sweep();
      lab = tf.t0 > 0.0 ? trp::to_lab(s, tf.omega1, tf.t0, tf.omega0) : trp::to_lab(s, tf.omega1, tf.omega0);
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const double B = trp::quartic_twist_strength(lab);
  json j{{"sweep", s}, {"lab", lab}, {"b_lab", B}};
  if (!tf.program.empty()) {
    if (tf.samples < 2) throw UsageError("--samples must be >= 2");
    std::ofstream os(tf.program);
    if (!os) throw UsageError("cannot write " + tf.program);
    trp::write_csv(os, trp::phase_programs(lab, trp::kQuarticTwist, B, tf.samples));
    j["phase_program"] = tf.program;
  }
  std::ostringstream h;
  h << "lambda = " << trp::io::format_double(s.lambda) << ", eta4 = " << trp::io::format_double(s.eta)
    << ", tau0 = " << trp::io::format_double(s.tau0) << "\n"
    << "omega1 = " << lab.omega1 << ", A = " << trp::io::format_double(lab.A)
    << ", calB = " << trp::io::format_double(lab.calB) << ", T0 = " << trp::io::format_double(lab.T0)
    << ", omega0 = " << lab.omega0 << ", B = " << trp::io::format_double(B) << "\n";
  emit(g, j, h.str());
  return kOk;
}

int run_targets(const Globals& g) {
  json j = json::object();
  std::ostringstream h;
  for (trp::GateName name : trp::kAllGates) {
    const trp::Unitary2 u = trp::target_unitary(name);
    json pairs = json::array();
    for (int r = 0; r < 2; ++r) {
      json row = json::array();
      for (int c = 0; c < 2; ++c) row.push_back({u(r, c).real(), u(r, c).imag()});
      pairs.push_back(row);
    }
    j[std::string(trp::to_string(name))] = {{"matrix", pairs},
                                            {"sweep_target", trp::is_sweep_target(name)},
                                            {"composite", trp::is_composite(name)}};
    print_matrix(h, std::string(trp::to_string(name)), u.matrix());
  }
  // The target listing is JSON by design; the human view is the matrix print.
  emit(g, j, h.str());
  return kOk;
}

int run_reproduce(const Globals& g, const std::string& out_dir, trp::ReproduceOptions opt) {
  opt.threads = g.threads;
  const trp::ReproduceSummary sum = trp::reproduce_all(opt);
  trp::write_bundle(out_dir, sum);
  std::ostringstream h;
  for (const auto& c : sum.report.at("checks")) {
    h << (c.at("pass").get<bool>() ? "PASS  " : "FAIL  ") << c.at("name").get<std::string>() << "\n";
  }
  h << "bundle written to " << out_dir << "\n";
  emit(g, json{{"out_dir", out_dir}, {"property_pass", sum.property_pass},
               {"calibration_pass", sum.calibration_pass}, {"optimization_pass", sum.report.at("optimization_pass")}},
       h.str());
  if (!sum.property_pass) return kNumerical;
  if (!sum.calibration_pass) return kCalibration;
  if (opt.optimize && !sum.optimization_pass) return kOptimization;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted rapid passage gate simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("trp ") + trp::kVersion);
  Globals g;
  app.add_flag("--json", g.json, "machine-readable JSON on stdout");
  app.add_option("--threads", g.threads, "parallel objective evaluations")->check(CLI::PositiveNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "propagate one sweep and report gate errors");
  SweepFlags sim_sweep;
  TolFlags sim_tol;
  std::string sim_target = "hadamard", sim_trace, sim_layout = "printed";
  int sim_samples = trp::kDefaultSamples;
  std::uint64_t sim_seed = trp::kDefaultSeed;
  sim_sweep.add(sim);
  sim_tol.add(sim);
  sim->add_option("--target", sim_target, "target gate")->capture_default_str();
  sim->add_option("--trace", sim_trace, "write the amplitude trajectory CSV here");
  sim->add_option("--layout", sim_layout, "matrix layout: printed or output-rows")->capture_default_str();
  sim->add_option("--samples", sim_samples, "Haar states for sampled P_e")->capture_default_str();
  sim->add_option("--seed", sim_seed, "sampling seed")->capture_default_str();

  // optimize
  auto* opt = app.add_subcommand("optimize", "downhill simplex search minimizing Tr P");
  std::string opt_target = "hadamard", opt_simplex, opt_ledger;
  SweepFlags opt_sweep;
  TolFlags opt_tol;
  double opt_dl = 0.01, opt_de = 1e-5;
  int opt_iter = -1, opt_evals = -1, opt_restarts = -1;
  opt->add_option("--target", opt_target, "target gate")->capture_default_str();
  auto* simplex_opt = opt->add_option("--simplex", opt_simplex, "simplex config (JSON)");
  auto* lam_opt = opt->add_option("--lambda", opt_sweep.lambda, "simplex anchor lambda");
  auto* eta_opt = opt->add_option("--eta4,--eta", opt_sweep.eta4, "simplex anchor eta4");
  opt->add_option("--tau0", opt_sweep.tau0, "sweep duration")->capture_default_str();
  opt->add_option("--d-lambda", opt_dl, "simplex edge along lambda")->capture_default_str();
  opt->add_option("--d-eta", opt_de, "simplex edge along eta4")->capture_default_str();
  lam_opt->excludes(simplex_opt);
  eta_opt->excludes(simplex_opt);
  opt->add_option("--max-iter", opt_iter, "iteration cap (default 500)");
  opt->add_option("--max-evals", opt_evals, "objective evaluation cap (0 = none)");
  opt->add_option("--restarts", opt_restarts, "re-seed k shrunk simplexes around the incumbent");
  opt->add_option("--ledger", opt_ledger,
                  std::string("JSON Lines results ledger ('-' disables; default $") + kLedgerEnv +
                      " or " + kDefaultLedger + ")");
  auto* rtol_opt = opt->add_option("--rtol", opt_tol.tol.rtol, "integrator relative tolerance");
  auto* atol_opt = opt->add_option("--atol", opt_tol.tol.atol, "integrator absolute tolerance");

  // scan
  auto* scan = app.add_subcommand("scan", "Tr P along one parameter axis");
  std::string scan_target = "hadamard", scan_vary = "lambda", scan_values, scan_out;
  SweepFlags scan_sweep;
  TolFlags scan_tol;
  scan->add_option("--target", scan_target, "target gate")->capture_default_str();
  scan_sweep.add(scan);
  scan_tol.add(scan);
  scan->add_option("--vary", scan_vary, "lambda or eta4")->capture_default_str();
  scan->add_option("--values", scan_values, "comma-separated values")->required();
  scan->add_option("--out", scan_out, "CSV output file (stdout if omitted)");

  // resonances
  auto* res = app.add_subcommand("resonances", "resonance times and regime");
  SweepFlags res_sweep;
  res_sweep.add(res);

  // translate
  auto* tr = app.add_subcommand("translate", "dimensionless <-> laboratory parameters");
  SweepFlags tr_sweep;
  TranslateFlags tr_flags;
  tr_sweep.add(tr);
  tr->add_option("--omega1", tr_flags.omega1, "rf field strength")->capture_default_str();
  tr->add_option("--t0", tr_flags.t0, "inversion time in seconds (derived from tau0 if omitted)");
  tr->add_option("--omega0", tr_flags.omega0, "Larmor frequency")->capture_default_str();
  auto* from_flag = tr->add_flag("--from-lab", tr_flags.from_lab, "translate laboratory values to dimensionless");
  auto* a_opt = tr->add_option("--a", tr_flags.a, "inversion half-range A = a T0 / hbar");
  auto* b_opt = tr->add_option("--cal-b", tr_flags.cal_b, "laboratory twist strength calB");
  a_opt->needs(from_flag);
  b_opt->needs(from_flag);
  tr->add_option("--phase-program", tr_flags.program, "write the phase program CSV here");
  tr->add_option("--samples", tr_flags.samples, "phase program samples")->capture_default_str();

  // targets
  auto* tg = app.add_subcommand("targets", "list target gate matrices");

  // reproduce
  auto* rep = app.add_subcommand("reproduce", "rerun the published gate results");
  std::string rep_out = "reproduce_out";
  trp::ReproduceOptions rep_opt;
  bool rep_no_opt = false;
  rep->add_option("--out", rep_out, "output directory")->capture_default_str();
  rep->add_option("--tau0", rep_opt.tau0, "sweep duration")->capture_default_str();
  rep->add_option("--samples", rep_opt.samples, "Haar states per gate")->capture_default_str();
  rep->add_option("--seed", rep_opt.seed, "sampling seed")->capture_default_str();
  rep->add_option("--rtol", rep_opt.tolerances.rtol, "integrator relative tolerance")->capture_default_str();
  rep->add_option("--atol", rep_opt.tolerances.atol, "integrator absolute tolerance")->capture_default_str();
  rep->add_flag("--no-optimize", rep_no_opt, "skip the simplex re-optimization tier");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sim) return run_simulate(g, sim_sweep, sim_tol, sim_target, sim_trace, sim_layout, sim_samples, sim_seed);
    if (*opt)
      return run_optimize(g, opt_target, opt_simplex, opt_sweep, lam_opt->count() + eta_opt->count() > 0, opt_dl,
                          opt_de, opt_iter, opt_evals, opt_restarts, opt_ledger, opt_tol,
                          rtol_opt->count() + atol_opt->count() > 0);
    if (*scan) return run_scan(g, scan_target, scan_sweep, scan_vary, scan_values, scan_out, scan_tol);
    if (*res) return run_resonances(g, res_sweep);
    if (*tr) return run_translate(g, tr_sweep, tr_flags);
    if (*tg) return run_targets(g);
    if (*rep) {
      rep_opt.optimize = !rep_no_opt;
      return run_reproduce(g, rep_out, rep_opt);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  } catch (const trp::DegenerateSimplexError& e) {
    std::cerr << "degenerate simplex: " << e.what() << "\n";
    return kDegenerate;
  } catch (const trp::IntegrationError& e) {
    std::cerr << "integration failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const trp::NonUnitaryError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
