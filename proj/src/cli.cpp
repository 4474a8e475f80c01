#include "gpmass/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "gpmass/acceptance.hpp"
#include "gpmass/bifurcation.hpp"
#include "gpmass/config.hpp"
#include "gpmass/continuation.hpp"
#include "gpmass/eigen.hpp"
#include "gpmass/errors.hpp"
#include "gpmass/evolve.hpp"
#include "gpmass/kernels.hpp"
#include "gpmass/manifest.hpp"
#include "gpmass/maximizer.hpp"
#include "gpmass/model.hpp"

namespace gpmass {
namespace {

constexpr const char* kVersion = "1.0.0";

// %.17g round-trips doubles exactly, which is what keeps CSV reruns
// bit-identical.
std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("GP_MASS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0)
      omp_set_num_threads(static_cast<int>(std::min(v, 1024L)));
    else
      std::cerr << "gp-mass: ignoring GP_MASS_THREADS='" << env
                << "' (want a positive integer)\n";
  }
#endif
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Loads the config and keeps a verbatim snapshot for the manifest, so a run
// can be reproduced from its output directory alone.
Config load_config_snapshot(const std::string& path, nlohmann::json* snapshot) {
  const std::string text = slurp(path);
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  Config c = is_json ? parse_json_text(text, path) : parse_toml_text(text, path);
  *snapshot = nlohmann::json{{"path", path}, {"text", text}, {"parsed", c.root}};
  return c;
}

nlohmann::json solver_tolerances(const MaximizeOptions& o) {
  return nlohmann::json{{"gtol", o.gtol}, {"ctol", o.ctol}, {"rtol", o.rtol}};
}

std::string csv_preamble(const std::string& subcommand, const MaximizeOptions& o) {
  std::string s;
  s += "# gp-mass " + subcommand + " version=" + kVersion + "\n";
  s += "# gtol=" + g17(o.gtol) + " ctol=" + g17(o.ctol) + " rtol=" + g17(o.rtol) + "\n";
  s += "# seed=" + std::to_string(o.seed) + "\n";
  return s;
}

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- eig ----

struct EigArgs {
  std::string config;
  std::string out = "gp-mass-eig";
};

int run_eig(const EigArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json snap;
  Config cfg = load_config_snapshot(a.config, &snap);
  ModelParams m = model_from_config(cfg);
  MaximizeOptions o = maximize_options_from_config(cfg);
  const EigenOptions eo;
  EigenPairs e = principal_eigenpairs(m, eo);

  ManifestWriter man(a.out, kVersion);
  man.set_config(snap);
  man.set_seed(o.seed);
  write_field(man.dir() / "phi1.gpfield", e.first.phi);
  man.record_file(man.dir() / "phi1.gpfield");
  write_field(man.dir() / "phi2.gpfield", e.second.phi);
  man.record_file(man.dir() / "phi2.gpfield");

  const nlohmann::json rec{
      {"lambda1", e.first.lambda},
      {"lambda2", e.second.lambda},
      {"residual1", e.first.residual},
      {"residual2", e.second.residual},
      {"iterations1", e.first.iterations},
      {"iterations2", e.second.iterations},
      {"seed", o.seed},
      {"tolerances", {{"eig_tol", eo.tol}, {"cg_tol", eo.cg_tol}}},
  };
  man.emit_text("eig.json", rec.dump(2) + "\n");
  man.note("timing", {{"seconds", elapsed_since(t0)}});
  man.finalize();

  std::cout << "lambda1 = " << g17(e.first.lambda) << "\n"
            << "lambda2 = " << g17(e.second.lambda) << "\n"
            << "wrote " << (man.dir() / "eig.json").string() << "\n";
  return 0;
}

// ---- maximize ----

struct MaximizeArgs {
  std::string config;
  std::string out = "gp-mass-maximize";
  double alpha = 0.0, rho1 = 0.0, rho2 = 0.0;
  uint64_t seed = 1;
  bool seed_given = false;
  int starts = 1;
};

int run_maximize(const MaximizeArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json snap;
  Config cfg = load_config_snapshot(a.config, &snap);
  ModelParams m = model_from_config(cfg);
  MaximizeOptions o = maximize_options_from_config(cfg);
  if (a.seed_given) o.seed = a.seed;
  if (a.starts < 1) throw ConfigError("maximize: --starts must be >= 1");

  EigenPairs eigs = principal_eigenpairs(m);
  const double T = feasibility_threshold(eigs, a.rho1, a.rho2);
  const ConstraintSpec c{a.alpha, a.rho1, a.rho2};
  SolitarySolution s = a.starts > 1
                           ? maximize_multistart(m, c, a.starts, o, eigs).front()
                           : maximize(m, c, std::nullopt, o, eigs);

  nlohmann::json rec{
      {"alpha", s.alpha},   {"rho1", s.rho1},
      {"rho2", s.rho2},     {"M", s.m_value},
      {"omega1", s.omega1}, {"omega2", s.omega2},
      {"gamma", s.gamma},   {"residual", s.residual},
      {"iterations", s.iterations},
      {"threshold", T},     {"seed", o.seed},
      {"starts", a.starts}, {"tolerances", solver_tolerances(o)},
  };
  if (s.gamma > 0.0) {
    const PhysicalSolution p = to_physical(s);
    rec["physical"] = {{"m1", p.m1}, {"m2", p.m2}};
  }

  ManifestWriter man(a.out, kVersion);
  man.set_config(snap);
  man.set_seed(o.seed);
  write_field(man.dir() / "u1.gpfield", s.pair.u1);
  man.record_file(man.dir() / "u1.gpfield");
  write_field(man.dir() / "u2.gpfield", s.pair.u2);
  man.record_file(man.dir() / "u2.gpfield");
  man.emit_text("maximize.json", rec.dump(2) + "\n");
  man.note("timing", {{"seconds", elapsed_since(t0)}});
  man.finalize();

  std::cout << rec.dump(2) << "\n";
  return 0;
}

// ---- sweep ----

struct SweepArgs {
  std::string config;
  std::string out = "gp-mass-sweep";
  double alpha_min = 0.0, alpha_max = 0.0;
  int points = 20;
  double rho1 = 0.0, rho2 = 0.0;
  double alpha_star = 0.0;
  bool alpha_star_given = false;
  uint64_t seed = 1;
  bool seed_given = false;
  bool cross_validate = false;
  bool gnuplot = false;
};

const char* kGnuplotScript =
    "# plot the branch curve emitted next to this script\n"
    "set datafile separator ','\n"
    "set key autotitle columnhead\n"
    "set xlabel 'alpha'\n"
    "set terminal pngcairo size 900,600\n"
    "set output 'branch_gamma.png'\n"
    "plot 'branch.csv' using 1:5 with linespoints title 'gamma'\n"
    "set output 'branch_e.png'\n"
    "plot 'branch.csv' using 1:7 with linespoints title 'e'\n";

int run_sweep(const SweepArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json snap;
  Config cfg = load_config_snapshot(a.config, &snap);
  ModelParams m = model_from_config(cfg);
  SweepOptions so;
  so.inner = maximize_options_from_config(cfg);
  if (a.seed_given) so.inner.seed = a.seed;
  so.cross_validate = a.cross_validate;
  if (a.points < 2) throw ConfigError("sweep: --points must be >= 2");
  if (!(a.alpha_max > a.alpha_min)) throw ConfigError("sweep: need alpha-max > alpha-min");

  std::vector<double> grid(a.points);
  for (int k = 0; k < a.points; ++k)
    grid[k] = a.alpha_min + (a.alpha_max - a.alpha_min) * k / (a.points - 1);

  EigenPairs eigs = principal_eigenpairs(m);
  BranchCurve b = sweep(m, a.rho1, a.rho2, grid, so, eigs);
  const double alpha_star = a.alpha_star_given ? a.alpha_star : grid[grid.size() / 2];
  ECurve ec = e_curve(b, alpha_star);
  const double margin = default_stability_margin(b);
  StabilityVerdict v = stability_verdict(b, margin);

  std::string csv = csv_preamble("sweep", so.inner);
  csv += "# alpha_star=" + g17(alpha_star) + " gamma_star=" + g17(ec.gamma_star) +
         " stability_margin=" + g17(margin) + "\n";
  csv += "alpha,M,omega1,omega2,gamma,gamma_prime,e,e_prime,residual,verdict\n";
  for (std::size_t k = 0; k < b.points.size(); ++k) {
    const SolitarySolution& p = b.points[k];
    csv += g17(p.alpha) + "," + g17(p.m_value) + "," + g17(p.omega1) + "," +
           g17(p.omega2) + "," + g17(p.gamma) + "," + g17(b.gamma_prime[k]) + "," +
           g17(ec.e[k]) + "," + g17(ec.e_prime[k]) + "," + g17(p.residual) + "," +
           (v.flags[k] == PointVerdict::stable ? "stable" : "inconclusive") + "\n";
  }

  ManifestWriter man(a.out, kVersion);
  man.set_config(snap);
  man.set_seed(so.inner.seed);
  man.emit_text("branch.csv", csv);
  const nlohmann::json rec{
      {"points", b.points.size()},
      {"rho1", b.rho1},
      {"rho2", b.rho2},
      {"alpha_star", alpha_star},
      {"gamma_star", ec.gamma_star},
      {"stability_margin", margin},
      {"stable_window", {v.window_lo, v.window_hi}},
      {"cross_validate", so.cross_validate},
      {"seed", so.inner.seed},
      {"tolerances", solver_tolerances(so.inner)},
  };
  man.emit_text("sweep.json", rec.dump(2) + "\n");
  if (a.gnuplot) man.emit_text("plot.gp", kGnuplotScript);
  man.note("timing", {{"seconds", elapsed_since(t0)}});
  man.finalize();

  std::cout << "swept " << b.points.size() << " points, alpha in [" << g17(grid.front())
            << ", " << g17(grid.back()) << "]\n"
            << "gamma in [" << g17(b.points.front().gamma) << ", "
            << g17(b.points.back().gamma) << "], gamma* = " << g17(ec.gamma_star) << "\n"
            << "stable window: [" << g17(v.window_lo) << ", " << g17(v.window_hi) << "]\n"
            << "wrote " << (man.dir() / "branch.csv").string() << "\n";
  return 0;
}

// ---- bifurcate ----

struct BifurcateArgs {
  std::string config;
  std::string out = "gp-mass-bifurcate";
  double theta = 0.0;
  std::string eps_grid;  // comma-separated, decreasing; empty = default ladder
  uint64_t seed = 1;
  bool seed_given = false;
};

std::vector<double> parse_eps_grid(const std::string& text) {
  if (text.empty()) {
    // default ladder: 8 points log-spaced from 1e-2 down to 1e-4
    std::vector<double> eps(8);
    for (int k = 0; k < 8; ++k) eps[k] = std::pow(10.0, -2.0 - 2.0 * k / 7.0);
    return eps;
  }
  std::vector<double> eps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
        ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      eps.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bifurcate: cannot parse eps value '" + item + "'");
    }
  }
  if (eps.empty()) throw ConfigError("bifurcate: empty --eps-grid");
  return eps;
}

int run_bifurcate(const BifurcateArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json snap;
  Config cfg = load_config_snapshot(a.config, &snap);
  ModelParams m = model_from_config(cfg);
  MaximizeOptions o = maximize_options_from_config(cfg);
  if (a.seed_given) o.seed = a.seed;
  const std::vector<double> eps = parse_eps_grid(a.eps_grid);

  EigenPairs eigs = principal_eigenpairs(m);
  ThetaPoint tp = theta_point(eigs, a.theta);
  KernelElement ke = kernel_element(m, eigs, a.theta);

  // kernel-membership residual, relative to the cubic right-hand side
  RealField z1(m.grid), z2(m.grid);
  kernels::cubic_term(tp.u_bar.u1.data(), tp.u_bar.u2.data(), m.scattering.mu1,
                      m.scattering.beta, z1.data(), z1.size());
  kernels::cubic_term(tp.u_bar.u2.data(), tp.u_bar.u1.data(), m.scattering.mu2,
                      m.scattering.beta, z2.data(), z2.size());
  LinearizedImage im =
      linearized_apply(m, eigs, tp, RealPair{ke.psi1, ke.psi2}, ke.o1, ke.o2, 1.0);
  const double membership = std::sqrt(l2_norm_sq(im.f1) + l2_norm_sq(im.f2) +
                                      im.h1 * im.h1 + im.h2 * im.h2 + im.k * im.k) /
                            std::sqrt(l2_norm_sq(z1) + l2_norm_sq(z2));

  ScalingFit fit = small_mass_scaling(m, a.theta, eps, o);

  std::string csv = csv_preamble("bifurcate", o);
  csv += "# theta=" + g17(a.theta) + " rho_bar1=" + g17(tp.rho_bar1) +
         " rho_bar2=" + g17(tp.rho_bar2) + "\n";
  csv += "eps,alpha,gamma,ratio_gamma_sqrt_eps,l2_dist_to_anchor\n";
  for (std::size_t k = 0; k < fit.eps.size(); ++k)
    csv += g17(fit.eps[k]) + "," + g17(fit.alpha[k]) + "," + g17(fit.gamma[k]) + "," +
           g17(fit.gamma[k] / std::sqrt(fit.eps[k])) + "," + g17(fit.dist[k]) + "\n";

  const nlohmann::json kernel{
      {"theta", a.theta},
      {"rho_bar1", tp.rho_bar1},
      {"rho_bar2", tp.rho_bar2},
      {"o1", ke.o1},
      {"o2", ke.o2},
      {"nondeg_value", ke.nondeg_value},
      {"solve_residual", ke.solve_residual},
      {"membership_residual", membership},
      {"fit", {{"slope", fit.slope},
               {"intercept", fit.intercept},
               {"ratio_at_smallest_eps", fit.ratio},
               {"ratio_label", "empirical"},
               {"dist_to_anchor", fit.dist_to_anchor}}},
      {"seed", o.seed},
      {"tolerances", solver_tolerances(o)},
  };

  ManifestWriter man(a.out, kVersion);
  man.set_config(snap);
  man.set_seed(o.seed);
  man.emit_text("scaling.csv", csv);
  man.emit_text("kernel.json", kernel.dump(2) + "\n");
  man.note("timing", {{"seconds", elapsed_since(t0)}});
  man.finalize();

  std::cout << "theta = " << g17(a.theta) << ": slope = " << g17(fit.slope)
            << ", gamma/sqrt(eps) -> " << g17(fit.ratio)
            << " (empirical), dist to anchor = " << g17(fit.dist_to_anchor) << "\n"
            << "kernel: o = (" << g17(ke.o1) << ", " << g17(ke.o2)
            << "), nondeg = " << g17(ke.nondeg_value)
            << ", membership residual = " << g17(membership) << "\n"
            << "wrote " << (man.dir() / "scaling.csv").string() << "\n";
  return 0;
}

// ---- evolve / stability ----

struct EvolveArgs {
  std::string config;
  std::string out = "gp-mass-evolve";
  double alpha = 0.0, rho1 = 0.0, rho2 = 0.0;
  double dt = 1e-3;
  double horizon = 10.0;
  double sample_dt = 0.1;
  std::string snapshots;  // comma-separated times
  uint64_t seed = 1;
  bool seed_given = false;
};

struct StabilityArgs {
  std::string config;
  std::string out = "gp-mass-stability";
  double alpha = 0.0, rho1 = 0.0, rho2 = 0.0;
  double delta = 1e-3;
  std::string kind = "bump";
  double dt = 1e-3;
  double horizon = 20.0;
  double sample_dt = 0.1;
  uint64_t seed = 1;
  bool seed_given = false;
};

struct SeriesResult {
  std::string rows;  // CSV body
  double sup_distance = 0.0;
  double max_mass_drift = 0.0;
  double max_energy_drift = 0.0;
};

// Steps to the horizon, sampling t, masses, energy, and the orbital distance
// to `reference` every sample_dt; dumps field snapshots the first time t
// reaches each requested snapshot time.
SeriesResult evolve_series(EvolutionState st, const ModelParams& m, double gamma_star,
                           double dt, double horizon, double sample_dt,
                           const RealPair& reference, std::vector<double> snapshot_times,
                           ManifestWriter& man, nlohmann::json* snapshot_log) {
  if (!(dt > 0.0)) throw ConfigError("evolve: dt must be positive");
  if (!(horizon > 0.0)) throw ConfigError("evolve: horizon must be positive");
  if (!(sample_dt > 0.0)) throw ConfigError("evolve: sample-dt must be positive");
  const long total = std::max<long>(1, std::lround(horizon / dt));
  const long every = std::max<long>(1, std::lround(sample_dt / dt));
  std::sort(snapshot_times.begin(), snapshot_times.end());
  std::size_t next_snap = 0;

  CnCache cache;
  SeriesResult r;
  auto sample = [&] {
    const double m1 = l2_norm_sq(modulus_field(st.pair.p1));
    const double m2 = l2_norm_sq(modulus_field(st.pair.p2));
    const double en = eval_energy(st.pair, m, gamma_star);
    const double dist = orbital_distance(st.pair, reference, m);
    r.sup_distance = std::max(r.sup_distance, dist);
    r.max_mass_drift = std::max({r.max_mass_drift, std::abs(m1 - st.mass1_0) / st.mass1_0,
                                 std::abs(m2 - st.mass2_0) / st.mass2_0});
    r.max_energy_drift =
        std::max(r.max_energy_drift, std::abs(en - st.energy_0) / std::abs(st.energy_0));
    r.rows += g17(st.t) + "," + g17(m1) + "," + g17(m2) + "," + g17(en) + "," +
              g17(dist) + "\n";
  };
  auto snapshot = [&] {
    while (next_snap < snapshot_times.size() &&
           st.t >= snapshot_times[next_snap] - 0.5 * dt) {
      const std::string f1 = "psi1_snap" + std::to_string(next_snap) + ".gpfield";
      const std::string f2 = "psi2_snap" + std::to_string(next_snap) + ".gpfield";
      write_field(man.dir() / f1, st.pair.p1);
      man.record_file(man.dir() / f1);
      write_field(man.dir() / f2, st.pair.p2);
      man.record_file(man.dir() / f2);
      if (snapshot_log)
        snapshot_log->push_back({{"index", next_snap},
                                 {"requested_t", snapshot_times[next_snap]},
                                 {"actual_t", st.t},
                                 {"files", {f1, f2}}});
      ++next_snap;
    }
  };

  sample();
  snapshot();
  for (long k = 1; k <= total; ++k) {
    st = step(std::move(st), m, gamma_star, dt, cache);
    snapshot();
    if (k % every == 0 || k == total) sample();
  }
  return r;
}

std::vector<double> parse_snapshot_times(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
        ++used;
      if (used != item.size() || !(v >= 0.0)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("evolve: cannot parse snapshot time '" + item + "'");
    }
  }
  return out;
}

int run_evolve(const EvolveArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json snap;
  Config cfg = load_config_snapshot(a.config, &snap);
  ModelParams m = model_from_config(cfg);
  MaximizeOptions o = maximize_options_from_config(cfg);
  if (a.seed_given) o.seed = a.seed;

  EigenPairs eigs = principal_eigenpairs(m);
  SolitarySolution s = maximize(m, {a.alpha, a.rho1, a.rho2}, std::nullopt, o, eigs);

  ManifestWriter man(a.out, kVersion);
  man.set_config(snap);
  man.set_seed(o.seed);
  nlohmann::json snapshot_log = nlohmann::json::array();
  SeriesResult r =
      evolve_series(make_state(s.pair, m, s.gamma), m, s.gamma, a.dt, a.horizon,
                    a.sample_dt, s.pair, parse_snapshot_times(a.snapshots), man,
                    &snapshot_log);

  std::string csv = csv_preamble("evolve", o);
  csv += "# alpha=" + g17(s.alpha) + " gamma_star=" + g17(s.gamma) + " dt=" + g17(a.dt) +
         " horizon=" + g17(a.horizon) + " sample_dt=" + g17(a.sample_dt) + "\n";
  csv += "t,mass1,mass2,energy,orbital_distance\n";
  csv += r.rows;
  man.emit_text("trajectory.csv", csv);

  const nlohmann::json rec{
      {"alpha", s.alpha},
      {"rho1", s.rho1},
      {"rho2", s.rho2},
      {"gamma_star", s.gamma},
      {"dt", a.dt},
      {"horizon", a.horizon},
      {"sample_dt", a.sample_dt},
      {"sup_orbital_distance", r.sup_distance},
      {"max_mass_drift", r.max_mass_drift},
      {"max_energy_drift", r.max_energy_drift},
      {"snapshots", snapshot_log},
      {"seed", o.seed},
      {"tolerances", solver_tolerances(o)},
  };
  man.emit_text("evolve.json", rec.dump(2) + "\n");
  man.note("timing", {{"seconds", elapsed_since(t0)}});
  man.finalize();

  std::cout << "evolved to t = " << g17(a.horizon)
            << ": sup orbital distance = " << g17(r.sup_distance)
            << ", mass drift = " << g17(r.max_mass_drift)
            << ", energy drift = " << g17(r.max_energy_drift) << "\n"
            << "wrote " << (man.dir() / "trajectory.csv").string() << "\n";
  return 0;
}

int run_stability(const StabilityArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json snap;
  Config cfg = load_config_snapshot(a.config, &snap);
  ModelParams m = model_from_config(cfg);
  MaximizeOptions o = maximize_options_from_config(cfg);
  if (a.seed_given) o.seed = a.seed;
  const PerturbationKind kind = perturbation_kind_from_name(a.kind);
  if (!(a.delta >= 0.0)) throw ConfigError("stability: --delta must be >= 0");

  EigenPairs eigs = principal_eigenpairs(m);
  SolitarySolution s = maximize(m, {a.alpha, a.rho1, a.rho2}, std::nullopt, o, eigs);
  StabilityOptions sopts;
  sopts.seed = o.seed;
  sopts.sample_dt = a.sample_dt;
  sopts.inner = o;
  ComplexPair data = perturbed_data(s, m, a.delta, kind, sopts);

  ManifestWriter man(a.out, kVersion);
  man.set_config(snap);
  man.set_seed(o.seed);
  SeriesResult r = evolve_series(make_state(data, m, s.gamma), m, s.gamma, a.dt,
                                 a.horizon, a.sample_dt, s.pair, {}, man, nullptr);

  std::string csv = csv_preamble("stability", o);
  csv += "# alpha=" + g17(s.alpha) + " gamma_star=" + g17(s.gamma) + " delta=" +
         g17(a.delta) + " kind=" + perturbation_kind_name(kind) + " dt=" + g17(a.dt) +
         " horizon=" + g17(a.horizon) + " sample_dt=" + g17(a.sample_dt) + "\n";
  csv += "t,mass1,mass2,energy,orbital_distance\n";
  csv += r.rows;
  man.emit_text("series.csv", csv);

  const nlohmann::json rec{
      {"alpha", s.alpha},
      {"rho1", s.rho1},
      {"rho2", s.rho2},
      {"gamma_star", s.gamma},
      {"delta", a.delta},
      {"kind", perturbation_kind_name(kind)},
      {"dt", a.dt},
      {"horizon", a.horizon},
      {"sample_dt", a.sample_dt},
      {"sup_orbital_distance", r.sup_distance},
      {"max_mass_drift", r.max_mass_drift},
      {"max_energy_drift", r.max_energy_drift},
      {"seed", o.seed},
      {"tolerances", solver_tolerances(o)},
  };
  man.emit_text("stability.json", rec.dump(2) + "\n");
  man.note("timing", {{"seconds", elapsed_since(t0)}});
  man.finalize();

  std::cout << "delta = " << g17(a.delta) << " (" << perturbation_kind_name(kind)
            << ", seed " << o.seed
            << "): sup orbital distance = " << g17(r.sup_distance) << " to t = "
            << g17(a.horizon) << "\n"
            << "wrote " << (man.dir() / "series.csv").string() << "\n";
  return 0;
}

// ---- acceptance ----

struct AcceptanceArgs {
  std::string out = "gp-mass-acceptance";
  int only = 0;
  int scale = 1;
};

int run_acceptance_cmd(const AcceptanceArgs& a) {
  if (a.only < 0 || a.only > 11) throw ConfigError("acceptance: --only must be in 1..11");
  if (a.scale < 1) throw ConfigError("acceptance: --scale must be >= 1");
  AcceptanceOptions opts;
  opts.only = a.only;
  opts.scale = a.scale;

  ManifestWriter man(a.out, kVersion);
  man.set_config(nlohmann::json{{"only", a.only}, {"scale", a.scale}});
  man.set_seed(1);  // criterion seeds are pinned constants
  std::vector<CriterionOutcome> res = run_acceptance(opts, std::cout);

  // timing stays out of the CSV so identical reruns are bit-identical
  std::string csv = "# gp-mass acceptance version=" + std::string(kVersion) + "\n";
  csv += "# scale=" + std::to_string(a.scale) + " (tolerances widen by scale^2)\n";
  csv += "index,name,pass\n";
  nlohmann::json detail = nlohmann::json::array();
  bool all_pass = true;
  for (const CriterionOutcome& r : res) {
    csv += std::to_string(r.index) + "," + r.name + "," + (r.pass ? "PASS" : "FAIL") + "\n";
    detail.push_back({{"index", r.index},
                      {"name", r.name},
                      {"pass", r.pass},
                      {"detail", r.detail},
                      {"seconds", r.seconds}});
    all_pass = all_pass && r.pass;
  }
  man.emit_text("acceptance.csv", csv);
  man.note("criteria", detail);
  man.finalize();
  return all_pass ? 0 : 1;
}

int fail_with(int code, const std::string& what) {
  std::cerr << "gp-mass: " << what << "\n";
  return code;
}

}  // namespace

int cli_main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{
      "gp-mass: solitary waves of coupled cubic Gross-Pitaevskii systems "
      "with trapping potentials"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  EigArgs eig_a;
  CLI::App* eig = app.add_subcommand("eig", "principal trap eigenpairs with field dumps");
  eig->add_option("--config", eig_a.config, "TOML or JSON model config")->required();
  eig->add_option("--out", eig_a.out, "output directory");

  MaximizeArgs mx_a;
  CLI::App* mx = app.add_subcommand("maximize", "solve one constrained maximization");
  mx->add_option("--config", mx_a.config, "TOML or JSON model config")->required();
  mx->add_option("--alpha", mx_a.alpha, "H-budget")->required();
  mx->add_option("--rho1", mx_a.rho1, "first mass constraint")->required();
  mx->add_option("--rho2", mx_a.rho2, "second mass constraint")->required();
  mx->add_option("--seed", mx_a.seed, "RNG seed (overrides [solver] seed)");
  mx->add_option("--starts", mx_a.starts, "multi-start count (best result reported)");
  mx->add_option("--out", mx_a.out, "output directory");

  SweepArgs sw_a;
  CLI::App* sw = app.add_subcommand("sweep", "trace the branch over an alpha grid");
  sw->add_option("--config", sw_a.config, "TOML or JSON model config")->required();
  sw->add_option("--alpha-min", sw_a.alpha_min, "first grid point")->required();
  sw->add_option("--alpha-max", sw_a.alpha_max, "last grid point")->required();
  sw->add_option("--points", sw_a.points, "grid size (default 20)");
  sw->add_option("--rho1", sw_a.rho1, "first mass constraint")->required();
  sw->add_option("--rho2", sw_a.rho2, "second mass constraint")->required();
  sw->add_option("--alpha-star", sw_a.alpha_star, "e-curve reference point (default: midpoint)");
  sw->add_option("--seed", sw_a.seed, "RNG seed (overrides [solver] seed)");
  sw->add_flag("--cross-validate", sw_a.cross_validate, "re-solve cold and flag branch jumps");
  sw->add_flag("--gnuplot", sw_a.gnuplot, "emit a gnuplot script next to the CSV");
  sw->add_option("--out", sw_a.out, "output directory");

  BifurcateArgs bf_a;
  CLI::App* bf = app.add_subcommand("bifurcate", "kernel diagnostics and small-mass scaling");
  bf->add_option("--config", bf_a.config, "TOML or JSON model config")->required();
  bf->add_option("--theta", bf_a.theta, "mixing angle in (0, pi/2)")->required();
  bf->add_option("--eps-grid", bf_a.eps_grid,
                 "comma-separated eps values, decreasing (default: 1e-2 .. 1e-4)");
  bf->add_option("--seed", bf_a.seed, "RNG seed (overrides [solver] seed)");
  bf->add_option("--out", bf_a.out, "output directory");

  EvolveArgs ev_a;
  CLI::App* ev = app.add_subcommand("evolve", "time-step a converged standing wave");
  ev->add_option("--config", ev_a.config, "TOML or JSON model config")->required();
  ev->add_option("--alpha", ev_a.alpha, "H-budget")->required();
  ev->add_option("--rho1", ev_a.rho1, "first mass constraint")->required();
  ev->add_option("--rho2", ev_a.rho2, "second mass constraint")->required();
  ev->add_option("--dt", ev_a.dt, "time step (default 1e-3)");
  ev->add_option("--horizon", ev_a.horizon, "final time (default 10)");
  ev->add_option("--sample-dt", ev_a.sample_dt, "sampling interval (default 0.1)");
  ev->add_option("--snapshots", ev_a.snapshots, "comma-separated times for field dumps");
  ev->add_option("--seed", ev_a.seed, "RNG seed (overrides [solver] seed)");
  ev->add_option("--out", ev_a.out, "output directory");

  StabilityArgs st_a;
  CLI::App* st = app.add_subcommand("stability", "perturb a standing wave and track the orbit");
  st->add_option("--config", st_a.config, "TOML or JSON model config")->required();
  st->add_option("--alpha", st_a.alpha, "H-budget")->required();
  st->add_option("--rho1", st_a.rho1, "first mass constraint")->required();
  st->add_option("--rho2", st_a.rho2, "second mass constraint")->required();
  st->add_option("--delta", st_a.delta, "perturbation size in the H-norm (default 1e-3)");
  st->add_option("--kind", st_a.kind, "bump | rotation | branch-tangent (default bump)");
  st->add_option("--dt", st_a.dt, "time step (default 1e-3)");
  st->add_option("--horizon", st_a.horizon, "final time (default 20)");
  st->add_option("--sample-dt", st_a.sample_dt, "sampling interval (default 0.1)");
  st->add_option("--seed", st_a.seed, "RNG seed (overrides [solver] seed)");
  st->add_option("--out", st_a.out, "output directory");

  AcceptanceArgs ac_a;
  CLI::App* ac = app.add_subcommand("acceptance", "run the acceptance suite");
  ac->add_option("--only", ac_a.only, "run a single criterion (1..11)");
  ac->add_option("--scale", ac_a.scale, "divide grid resolutions by this factor");
  ac->add_option("--out", ac_a.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "gp-mass: " << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  mx_a.seed_given = mx->count("--seed") > 0;
  sw_a.seed_given = sw->count("--seed") > 0;
  sw_a.alpha_star_given = sw->count("--alpha-star") > 0;
  bf_a.seed_given = bf->count("--seed") > 0;
  ev_a.seed_given = ev->count("--seed") > 0;
  st_a.seed_given = st->count("--seed") > 0;

  try {
    if (eig->parsed()) return run_eig(eig_a);
    if (mx->parsed()) return run_maximize(mx_a);
    if (sw->parsed()) return run_sweep(sw_a);
    if (bf->parsed()) return run_bifurcate(bf_a);
    if (ev->parsed()) return run_evolve(ev_a);
    if (st->parsed()) return run_stability(st_a);
    if (ac->parsed()) return run_acceptance_cmd(ac_a);
    std::cerr << app.help() << std::flush;
    return 2;
  } catch (const ConfigError& e) {
    return fail_with(2, e.what());
  } catch (const InfeasibleConstraint& e) {
    return fail_with(2, e.what());
  } catch (const OutOfRange& e) {
    return fail_with(2, e.what());
  } catch (const ThetaDegenerate& e) {
    return fail_with(2, e.what());
  } catch (const NonpositiveGamma& e) {
    return fail_with(2, e.what());
  } catch (const IoError& e) {
    return fail_with(2, e.what());
  } catch (const NoConvergence& e) {
    return fail_with(3, e.what());
  } catch (const LinearSolveFailure& e) {
    return fail_with(3, e.what());
  } catch (const RetractFailure& e) {
    return fail_with(3, e.what());
  } catch (const SingularFit& e) {
    return fail_with(3, e.what());
  } catch (const RhsNotOrthogonal& e) {
    return fail_with(3, e.what());
  } catch (const DegenerateRegime& e) {
    return fail_with(4, e.what());
  } catch (const std::exception& e) {
    return fail_with(1, std::string("internal error: ") + e.what());
  }
}

}  // namespace gpmass
