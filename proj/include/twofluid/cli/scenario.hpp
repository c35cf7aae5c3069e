#pragma once

// Subcommand orchestration. Exit codes: 0 success, 1 invalid configuration
// or inadmissible input, 2 numerical failure (diagnostics.json names the
// cell and time when known).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "twofluid/cli/config.hpp"
#include "twofluid/cli/io.hpp"
#include "twofluid/error.hpp"
#include "twofluid/hyperbolicity.hpp"
#include "twofluid/solver.hpp"
#include "twofluid/verify.hpp"

namespace twofluid::cli {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "hyperbolicity-map", "verify-gibbs", "fick-relax",
                                              "reduce-check"};
  return names;
}

struct RunOptions {
  std::string subcommand;
  fs::path config;
  fs::path out;
  std::uint64_t seed = 0;
  /// Progress and summary lines; may be null.
  std::ostream* log = nullptr;
};

// ---------------------------------------------------------------------------
// Manifest helpers

inline json to_json(const ProfileSpec& p) {
  if (p.isothermal_theta) return fmt::format("isothermal({})", format_double(*p.isothermal_theta));
  return p.profile.describe();
}

inline json config_to_json(const ScenarioConfig& c) {
  json j;
  json pot;
  pot["law"] = c.potential.law;
  for (int a = 0; a < kPhases; ++a) {
    const std::string n = std::to_string(a + 1);
    const PhaseParams& p = c.potential.phases[a];
    pot["gamma" + n] = p.gamma;
    pot["cv" + n] = p.cv;
    pot["K" + n] = p.K0;
    pot["s0" + n] = p.s0;
  }
  pot["a"] = c.potential.a;
  j["potential"] = pot;
  j["closures"] = {{"k", c.closures.k}, {"kappa", c.closures.kappa}};
  j["grid"] = {{"x_lo", c.grid.x_lo},
               {"x_hi", c.grid.x_hi},
               {"cells", c.grid.cells},
               {"boundary", to_string(c.grid.boundary)}};
  json init;
  for (int a = 0; a < kPhases; ++a) {
    const std::string n = std::to_string(a + 1);
    init["rho" + n] = to_json(c.initial.rho[a]);
    init["u" + n] = to_json(c.initial.u[a]);
    init["s" + n] = to_json(c.initial.s[a]);
  }
  init["noise"] = c.initial.noise;
  j["initial"] = init;
  j["external"] = {{"omega1", to_json(c.omega[0])}, {"omega2", to_json(c.omega[1])}};
  j["run"] = {{"cfl", c.run.cfl},
              {"t_end", c.run.t_end},
              {"output_interval", c.run.output_interval},
              {"theta0", c.run.theta0},
              {"speeds", c.run.speeds == SpeedMethod::kClosedForm ? "closed_form" : "finite_difference"},
              {"max_steps", c.run.max_steps}};
  auto axis = [](const AxisRange& r) { return json::array({r.lo, r.hi, r.count}); };
  j["map"] = {{"rho1", axis(c.map.rho1)},
              {"rho2", axis(c.map.rho2)},
              {"w", axis(c.map.w)},
              {"s1", c.map.s[0]},
              {"s2", c.map.s[1]},
              {"critical", c.map.critical},
              {"critical_w_max", c.map.critical_w_max},
              {"critical_points", c.map.critical_points},
              {"critical_tol", c.map.critical_tol}};
  j["verify"] = {{"field_sets", c.verify.field_sets},
                 {"points", c.verify.points},
                 {"steps", c.verify.steps},
                 {"modes", c.verify.ranges.modes},
                 {"k_max", c.verify.ranges.k_max},
                 {"freq_max", c.verify.ranges.freq_max},
                 {"potentials", c.verify.ranges.with_potentials},
                 {"min_ratio", c.verify.min_ratio}};
  j["fick"] = {{"sample_times", c.fick.sample_times},
               {"theta_bound", c.fick.theta_bound},
               {"max_residual", c.fick.max_residual}};
  j["reduce"] = {{"rho", to_json(c.reduce.rho)},
                 {"u", to_json(c.reduce.u)},
                 {"omega", to_json(c.reduce.omega)},
                 {"s", c.reduce.s},
                 {"t_end", c.reduce.t_end},
                 {"cells", c.reduce.cells},
                 {"reference_cells", c.reduce.reference_cells},
                 {"min_order", c.reduce.min_order}};
  return j;
}

inline json versions() {
  return {{"twofluid", kVersion},
          {"compiler", __VERSION__},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"fmt", FMT_VERSION}};
}

/// Doubles that may be non-finite go into JSON as strings.
inline json number_or_string(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

// ---------------------------------------------------------------------------
// Shared setup

inline SimulationConfig<SeparableAddedMass> simulation_config(const ScenarioConfig& c) {
  SimulationConfig<SeparableAddedMass> s{c.potential.make_law()};
  s.grid = c.grid;
  s.closures = c.closures;
  s.external = c.external();
  s.cfl = c.run.cfl;
  s.t_end = c.run.t_end;
  s.output_interval = c.run.output_interval;
  s.theta0 = c.run.theta0;
  s.speeds = c.run.speeds;
  s.max_steps = static_cast<std::size_t>(c.run.max_steps);
  return s;
}

/// Initial cells from the [initial] profiles. Density noise, when requested,
/// is drawn cell by cell from the seeded generator.
inline std::vector<EvolvedState> initial_state(const ScenarioConfig& c, const SimulationConfig<SeparableAddedMass>& s,
                                               std::uint64_t seed) {
  std::vector<std::array<double, kPhases>> factor(c.grid.cells, {1.0, 1.0});
  if (c.initial.noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (auto& f : factor) {
      for (double& v : f) v = 1.0 + c.initial.noise * unit(rng);
    }
  }
  const double dx = c.grid.dx();
  return initial_cells(s, [&](double x) {
    const int i = std::clamp(static_cast<int>(std::floor((x - c.grid.x_lo) / dx)), 0, c.grid.cells - 1);
    PrimitiveState p;
    for (int a = 0; a < kPhases; ++a) {
      p.rho[a] = c.initial.rho[a].profile(x) * factor[i][a];
      p.u[a] = c.initial.u[a].profile(x);
      const ProfileSpec& sp = c.initial.s[a];
      p.s[a] = sp.isothermal_theta ? s.law.isothermal_entropy(a, p.rho[a], *sp.isothermal_theta) : sp.profile(x);
    }
    return p;
  });
}

inline void snapshot_csv(const Snapshot& snap, const fs::path& path) {
  CsvTable t({"x", "rho1", "rho2", "u1", "u2", "s1", "s2", "K1", "K2", "theta1", "theta2"});
  for (const CellState& c : snap.cells) {
    t.row() << c.x << c.p.rho[0] << c.p.rho[1] << c.p.u[0] << c.p.u[1] << c.p.s[0] << c.p.s[1] << c.K[0] << c.K[1]
            << c.theta[0] << c.theta[1];
  }
  t.write(path);
}

inline void reports_csv(const std::vector<TimeStepReport>& reports, const fs::path& path) {
  CsvTable t({"step", "t", "dt", "limit", "max_speed", "mass1", "mass2", "momentum_K", "momentum_u", "energy",
              "entropy", "min_eig_A"});
  for (const TimeStepReport& r : reports) {
    t.row() << r.step << r.t << r.dt << to_string(r.limit) << r.max_speed << r.mass[0] << r.mass[1] << r.momentum_K
            << r.momentum_u << r.energy << r.entropy << r.min_eig_A;
  }
  t.write(path);
}

inline json drift_json(const verify::ConservationDrift& d) {
  return {{"mass1_rel", d.mass_rel[0]},
          {"mass2_rel", d.mass_rel[1]},
          {"momentum_rel", d.momentum_rel},
          {"energy_rel", d.energy_rel},
          {"entropy_min_increment", d.entropy_min_increment},
          {"entropy_max_increment", d.entropy_max_increment}};
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns a summary for the manifest and appends the files
// it wrote.

inline json run_simulate(const ScenarioConfig& c, const RunOptions& opt, std::vector<std::string>& files) {
  const SimulationConfig<SeparableAddedMass> s = simulation_config(c);
  s.validate();
  const Trajectory traj = integrate(s, initial_state(c, s, opt.seed));

  CsvTable index({"snapshot", "t", "file"});
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const std::string name = fmt::format("snapshot_{:05d}.csv", i);
    snapshot_csv(traj.snapshots[i], opt.out / name);
    files.push_back(name);
    index.row() << i << traj.snapshots[i].t << name;
  }
  index.write(opt.out / "snapshots.csv");
  files.push_back("snapshots.csv");
  reports_csv(traj.reports, opt.out / "reports.csv");
  files.push_back("reports.csv");

  const verify::ConservationDrift d = verify::conservation_drift(traj);
  return {{"steps", traj.reports.back().step},
          {"t_final", traj.reports.back().t},
          {"snapshots", traj.snapshots.size()},
          {"drift", drift_json(d)}};
}

inline json run_hyperbolicity_map(const ScenarioConfig& c, const RunOptions& opt, std::vector<std::string>& files) {
  const SeparableAddedMass law = c.potential.make_law();
  RegionGrid grid{c.map.rho1.values(), c.map.rho2.values(), c.map.w.values(), c.map.s};
  const std::vector<HyperbolicityReport> reports = map_hyperbolic_region(law, grid);

  CsvTable t({"rho1", "rho2", "w", "min_eig_A", "ineq1", "ineq2", "ineq3", "lambda1", "lambda2", "lambda3",
              "lambda4", "hyperbolic"});
  std::size_t hyperbolic = 0;
  for (const HyperbolicityReport& r : reports) {
    auto row = t.row();
    row << r.state.rho[0] << r.state.rho[1] << r.state.w() << r.min_eig_A << r.inequalities.relative_velocity.holds
        << r.inequalities.density.holds << r.inequalities.determinant.holds;
    for (int i = 0; i < 4; ++i) row << (r.speeds ? (*r.speeds)[i] : std::numeric_limits<double>::quiet_NaN());
    row << r.hyperbolic;
    hyperbolic += r.hyperbolic ? 1 : 0;
  }
  t.write(opt.out / "hyperbolicity.csv");
  files.push_back("hyperbolicity.csv");
  json summary = {{"points", reports.size()}, {"hyperbolic", hyperbolic}};

  if (c.map.critical) {
    CsvTable ct({"rho1", "rho2", "found", "w_star", "w_hyperbolic", "w_lost", "min_eig_hyperbolic",
                 "min_eig_lost"});
    const CriticalScanOptions so{c.map.critical_w_max, c.map.critical_points, c.map.critical_tol};
    for (double r1 : grid.rho1) {
      for (double r2 : grid.rho2) {
        const CriticalVelocity cv = critical_relative_velocity(law, r1, r2, c.map.s, so);
        ct.row() << r1 << r2 << cv.found << cv.w_star << cv.w_hyperbolic << cv.w_lost << cv.min_eig_hyperbolic
                 << cv.min_eig_lost;
      }
    }
    ct.write(opt.out / "critical.csv");
    files.push_back("critical.csv");
  }
  return summary;
}

inline json run_verify_gibbs(const ScenarioConfig& c, const RunOptions& opt, std::vector<std::string>& files) {
  const SeparableAddedMass law = c.potential.make_law();
  const VerifySection& v = c.verify;
  std::mt19937_64 rng(opt.seed);

  CsvTable points({"set", "point", "t", "x", "h", "E", "M1", "M2", "B1", "B2", "S", "combination", "scale", "id_a",
                   "id_b", "id_c", "id_d", "id_e", "id_f"});
  CsvTable table({"set", "quantity", "h", "rms", "ratio"});

  constexpr int kRows = 1 + verify::AppendixIdentities::kCount;
  std::array<double, kRows> worst_ratio;
  worst_ratio.fill(std::numeric_limits<double>::infinity());
  double worst_a = 0.0;

  for (int set = 0; set < v.field_sets; ++set) {
    const verify::ManufacturedField field = verify::random_trigonometric_field(rng, v.ranges);
    const std::vector<verify::SamplePoint> pts = verify::sample_points(rng, field, v.points);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (double h : v.steps) {
        const verify::GibbsResidual g = verify::gibbs_residual(law, c.closures, field, pts[i].t, pts[i].x, h);
        const verify::AppendixIdentities id = verify::appendix_identities(law, c.closures, field, pts[i].t, pts[i].x, h);
        auto row = points.row();
        row << set << i << pts[i].t << pts[i].x << h << g.E << g.M[0] << g.M[1] << g.B[0] << g.B[1] << g.S
            << g.combination << g.scale;
        for (double r : id.residual) row << r;
        if (id.scale[0] > 0.0) worst_a = std::max(worst_a, std::abs(id.residual[0]) / id.scale[0]);
      }
    }
    const verify::ConvergenceStudy study = verify::convergence_study(law, c.closures, field, pts, v.steps);
    for (int r = 0; r < kRows; ++r) {
      const verify::ConvergenceRow& cr = study.rows[r];
      for (std::size_t k = 0; k < v.steps.size(); ++k) {
        table.row() << set << cr.quantity << v.steps[k] << cr.rms[k]
                    << (k == 0 ? std::numeric_limits<double>::quiet_NaN() : cr.ratios[k - 1]);
      }
      // identity a has no truncation error to converge
      if (r != 1) worst_ratio[r] = std::min(worst_ratio[r], cr.min_ratio());
    }
  }
  points.write(opt.out / "gibbs_points.csv");
  files.push_back("gibbs_points.csv");
  table.write(opt.out / "gibbs_convergence.csv");
  files.push_back("gibbs_convergence.csv");

  json ratios;
  bool pass = worst_a <= 1e-14;
  for (int r = 0; r < kRows; ++r) {
    if (r == 1) continue;
    const std::string name = r == 0 ? "gibbs" : std::string("id_") + verify::AppendixIdentities::kNames[r - 1];
    ratios[name] = number_or_string(worst_ratio[r]);
    pass = pass && worst_ratio[r] >= v.min_ratio;
  }
  return {{"min_ratio", ratios}, {"id_a_max_relative", worst_a}, {"passed", pass}};
}

inline json run_fick_relax(const ScenarioConfig& c, const RunOptions& opt, std::vector<std::string>& files) {
  SimulationConfig<SeparableAddedMass> s = simulation_config(c);
  s.t_end = c.fick.sample_times.back();
  s.validate();
  const verify::FickRelaxation res =
      verify::fick_relaxation(s, initial_state(c, s, opt.seed), c.fick.sample_times, c.fick.theta_bound);

  CsvTable t({"t", "residual", "grad_mu_norm", "defect_norm", "max_theta_deviation", "max_abs_w"});
  CsvTable prof({"sample", "t", "x", "grad_mu", "drag_term"});
  for (std::size_t k = 0; k < res.samples.size(); ++k) {
    const verify::FickSample& smp = res.samples[k];
    const verify::FickResidual& r = smp.residual;
    t.row() << smp.t << r.relative << r.grad_mu_norm << r.defect_norm << r.max_theta_deviation << r.max_abs_w;
    for (int i = 0; i < s.grid.cells; ++i) prof.row() << k << smp.t << s.grid.center(i) << r.grad_mu[i] << r.drag_term[i];
  }
  t.write(opt.out / "fick.csv");
  files.push_back("fick.csv");
  prof.write(opt.out / "fick_profiles.csv");
  files.push_back("fick_profiles.csv");
  reports_csv(res.trajectory.reports, opt.out / "reports.csv");
  files.push_back("reports.csv");

  const double last = res.samples.back().residual.relative;
  return {{"final_residual", last},
          {"decreasing", res.decreasing()},
          {"passed", res.decreasing() && last <= c.fick.max_residual}};
}

/// The [reduce] problem; only defined for identical components without added
/// mass.
inline verify::ReductionProblem reduction_problem(const ScenarioConfig& c) {
  const PotentialSection& p = c.potential;
  const PhaseParams &p1 = p.phases[0], &p2 = p.phases[1];
  if (p.a != 0.0 || p1.gamma != p2.gamma || p1.cv != p2.cv || p1.K0 != p2.K0 || p1.s0 != p2.s0) {
    throw ConfigError("reduce-check needs identical components and a = 0 in [potential]");
  }
  verify::ReductionProblem prob;
  prob.phase = p1;
  prob.x_lo = c.grid.x_lo;
  prob.x_hi = c.grid.x_hi;
  prob.boundary = c.grid.boundary;
  prob.rho = c.reduce.rho.profile;
  prob.u = c.reduce.u.profile;
  prob.omega = c.reduce.omega.profile;
  prob.s = c.reduce.s;
  prob.t_end = c.reduce.t_end;
  prob.cfl = c.run.cfl;
  prob.cells = c.reduce.cells;
  prob.reference_cells = c.reduce.reference_cells;
  return prob;
}

inline json run_reduce_check(const ScenarioConfig& c, const RunOptions& opt, std::vector<std::string>& files) {
  const verify::ReductionProblem prob = reduction_problem(c);
  const verify::ReductionResult res = verify::single_fluid_reduction(prob);

  CsvTable t({"cells", "l1_rho", "l1_u", "order_rho", "order_u"});
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    t.row() << res.rows[i].cells << res.rows[i].l1_rho << res.rows[i].l1_u << (i ? res.order_rho[i - 1] : nan)
            << (i ? res.order_u[i - 1] : nan);
  }
  t.write(opt.out / "reduction.csv");
  files.push_back("reduction.csv");

  json timing = json::array();
  for (const auto& r : res.rows) timing.push_back({{"cells", r.cells}, {"seconds", r.seconds}});
  return {{"min_order_rho", number_or_string(res.min_order_rho())},
          {"passed", res.min_order_rho() >= c.reduce.min_order},
          {"reference_seconds", res.reference_seconds},
          {"runs", timing}};
}

// ---------------------------------------------------------------------------

inline void write_diagnostics(const fs::path& out, const std::string& kind, const std::string& message, double time,
                              std::ptrdiff_t cell, const ScenarioConfig* cfg) {
  json d = {{"error", kind}, {"message", message}};
  d["time"] = number_or_string(time);
  d["cell"] = cell;
  if (cell >= 0 && cfg && cell < cfg->grid.cells) d["x"] = cfg->grid.center(static_cast<int>(cell));
  write_file_atomic(out / "diagnostics.json", d.dump(2) + "\n");
}

/// Runs one subcommand; never throws.
inline int run(RunOptions opt) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  std::ostream* log = opt.log;
  auto say = [log](const std::string& s) {
    if (log) *log << s << '\n';
  };

  if (const char* env = std::getenv("TWOFLUID_OUT_DIR"); env && *env) opt.out = env;

  json manifest;
  manifest["subcommand"] = opt.subcommand;
  manifest["config_file"] = opt.config.string();
  manifest["out_dir"] = opt.out.string();
  manifest["seed"] = opt.seed;
  manifest["versions"] = versions();

  std::vector<std::string> files;
  std::optional<ScenarioConfig> cfg;
  int code = 0;
  bool out_ready = false;
  try {
    bool known = false;
    for (const std::string& n : subcommands()) known = known || n == opt.subcommand;
    if (!known) throw ConfigError(fmt::format("unknown subcommand '{}'", opt.subcommand));
    std::error_code ec;
    fs::create_directories(opt.out, ec);
    if (ec || !fs::is_directory(opt.out)) {
      throw ConfigError(fmt::format("cannot create output directory '{}'", opt.out.string()));
    }
    out_ready = true;
    std::error_code ignored;
    fs::remove(opt.out / "diagnostics.json", ignored);

    cfg = load_config(opt.config.string());
    manifest["config"] = config_to_json(*cfg);
    cfg->potential.make_law();

    json summary;
    if (opt.subcommand == "simulate") {
      summary = run_simulate(*cfg, opt, files);
    } else if (opt.subcommand == "hyperbolicity-map") {
      summary = run_hyperbolicity_map(*cfg, opt, files);
    } else if (opt.subcommand == "verify-gibbs") {
      summary = run_verify_gibbs(*cfg, opt, files);
    } else if (opt.subcommand == "fick-relax") {
      summary = run_fick_relax(*cfg, opt, files);
    } else {
      summary = run_reduce_check(*cfg, opt, files);
    }
    manifest["summary"] = summary;
    say(fmt::format("{}: {}", opt.subcommand, summary.dump()));
  } catch (const StepError& e) {
    code = 2;
    manifest["error"] = e.what();
    say(fmt::format("numerical failure: {}", e.what()));
    if (out_ready) write_diagnostics(opt.out, "step", e.what(), e.time(), e.cell(), cfg ? &*cfg : nullptr);
  } catch (const ConfigError& e) {
    code = 1;
    manifest["error"] = e.what();
    say(fmt::format("configuration error: {}", e.what()));
  } catch (const DomainError& e) {
    code = 1;
    manifest["error"] = e.what();
    say(fmt::format("invalid input: {}", e.what()));
  } catch (const std::exception& e) {
    // ConvergenceError, NumericalError and anything unexpected
    code = 2;
    manifest["error"] = e.what();
    say(fmt::format("numerical failure: {}", e.what()));
    if (out_ready) {
      write_diagnostics(opt.out, "numerical", e.what(), std::numeric_limits<double>::quiet_NaN(), -1,
                        cfg ? &*cfg : nullptr);
    }
  }

  manifest["files"] = files;
  manifest["exit_code"] = code;
  manifest["wall_seconds"] = std::chrono::duration<double>(clock::now() - t0).count();
  if (out_ready) {
    try {
      write_file_atomic(opt.out / "run.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
      say(fmt::format("cannot write manifest: {}", e.what()));
      if (code == 0) code = 2;
    }
  }
  return code;
}

}  // namespace twofluid::cli
