// nlococ: simulation and optimal therapy control for the viscous non-local
// Cahn-Hilliard tumour-growth model with nutrient coupling.
//
// Subcommands: validate, simulate, energy-report, gradient-check,
// taylor-test, optimize. Exit codes: 0 success, 1 validation failure,
// 2 runtime failure.
#include "nloc/nloc.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace nloc;

namespace {

void applyThreadCap() {
  if (const char* cap = std::getenv("NLOCOC_THREADS")) {
    const int n = std::atoi(cap);
    if (n > 0) omp_set_num_threads(n);
  }
}

struct Session {
  Scenario scn;
  std::unique_ptr<KernelTable> table;
  fs::path out;
  std::uint64_t seed = 0;

  static Session open(const std::string& path, const std::string& outDir,
                      long long seedOverride, bool audit = true) {
    Session s;
    s.scn = loadScenario(path);
    if (audit) {
      const std::vector<std::string> violations = auditScenario(s.scn);
      if (!violations.empty()) throw ScenarioValidationError(violations);
    }
    s.table = buildKernelTable(s.scn.kernel, s.scn.grid);
    s.out = outDir.empty() ? fs::path("nlococ-out") / fs::path(path).stem() : fs::path(outDir);
    fs::create_directories(s.out);
    s.seed = seedOverride >= 0 ? static_cast<std::uint64_t>(seedOverride) : s.scn.seed;
    return s;
  }

  std::string file(const std::string& name) const { return (out / name).string(); }
};

int cmdValidate(const std::string& path) {
  Scenario scn = loadScenario(path);
  const std::vector<std::string> violations = auditScenario(scn);
  if (!violations.empty()) {
    std::printf("scenario '%s' rejected:\n", path.c_str());
    for (const std::string& v : violations) std::printf("  %s\n", v.c_str());
    return 1;
  }
  std::unique_ptr<KernelTable> table = buildKernelTable(scn.kernel, scn.grid);
  const CoercivityReport rep =
      checkCoercivity(*table, scn.potential, scn.params.A, scn.params.B, scn.params.chi);
  std::printf("scenario '%s': all assumptions satisfied\n", path.c_str());
  std::printf("  grid %dd %dx%d, horizon %g in %d steps\n", scn.grid.dim, scn.grid.nx(),
              scn.grid.ny(), scn.time.horizon, scn.time.steps);
  std::printf("  kernel %s(%g): a* = %.6g, b = %.6g\n", scn.kernel.name().c_str(),
              scn.kernel.param, table->aStar(), table->bConst());
  std::printf("  coercivity c0 = %.6g > chi^2 = %.6g (min F'' = %.6g on [%g, %g], %d samples)\n",
              rep.c0, rep.chiSq, rep.minFpp, rep.sLo, rep.sHi, rep.samples);
  return 0;
}

int cmdSimulate(Session& s) {
  const ControlPair controls = s.scn.initialControls();
  const Trajectory traj = simulate(s.scn.phi0(), s.scn.sigma0(), controls, s.scn.time,
                                   s.scn.params, *s.table, s.scn.potential);
  exportTrajectory(traj, s.file("traj"), ExportFormat::Raw64);
  exportTrajectory(traj, s.file("traj"), ExportFormat::Csv);
  exportMonitors(traj.monitors, s.file("monitors.csv"));
  const SeparationReport sep = separationReport(traj, s.scn.potential);
  double worstMass = 0.0;
  for (const StepMonitor& m : traj.monitors)
    worstMass = std::max(worstMass, std::fabs(m.massResidual));
  std::printf("simulate: %d steps done\n", s.scn.time.steps);
  std::printf("  final energy %.8g, max|phi| %.6g, worst mass-identity residual %.3e\n",
              traj.monitors.back().energy, sep.maxAbsPhi, worstMass);
  if (std::isfinite(sep.margin))
    std::printf("  separation margin %.6g%s\n", sep.margin, sep.breached ? " (BREACHED)" : "");
  std::printf("  outputs in %s\n", s.out.string().c_str());
  return 0;
}

int cmdEnergyReport(Session& s) {
  const ControlPair controls = s.scn.initialControls();
  const Trajectory traj = simulate(s.scn.phi0(), s.scn.sigma0(), controls, s.scn.time,
                                   s.scn.params, *s.table, s.scn.potential);
  const double l = s.scn.potential.domainHalfWidth();
  std::FILE* f = std::fopen(s.file("energy.csv").c_str(), "w");
  if (!f) throw Error("cannot open energy report output");
  std::fprintf(f, "step,time,energy,energy_identity_residual,mass,mass_residual,separation_margin\n");
  KahanSum ledger;
  double worstDefect = 0.0;
  for (int n = 0; n < s.scn.time.steps; ++n) {
    const StepMonitor& m = traj.monitors[static_cast<std::size_t>(n)];
    const double defect =
        energyIdentityResidual(traj.at(n), traj.at(n + 1), controls.u[n + 1], controls.v[n + 1],
                               s.scn.time.dt(), s.scn.params, *s.table, s.scn.potential);
    worstDefect = std::max(worstDefect, std::fabs(defect));
    ledger.add(m.massResidual);
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", n + 1, m.time, m.energy, defect,
                 m.mass, m.massResidual, l - m.maxAbsPhi);
  }
  std::fclose(f);
  std::printf("energy-report: worst energy-identity defect %.3e, cumulative mass defect %.3e\n",
              worstDefect, std::fabs(ledger.value()));
  std::printf("  per-step ledger in %s\n", s.file("energy.csv").c_str());
  return 0;
}

int cmdGradientCheck(Session& s) {
  Rng rng(s.seed + 1);
  const ControlPair controls = s.scn.initialControls();
  ControlPerturbation dir;
  dir.h = rng.timeField(s.scn.time.nodes(), s.scn.grid, -1.0, 1.0);
  dir.k = rng.timeField(s.scn.time.nodes(), s.scn.grid, -1.0, 1.0);
  const std::vector<double> ladder{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const FdReport rep =
      fdGradientOracle(s.scn.phi0(), s.scn.sigma0(), controls, dir, ladder, s.scn.weights,
                       s.scn.targets(), s.scn.time, s.scn.params, *s.table, s.scn.potential);
  std::printf("gradient-check: adjoint directional derivative %.12e\n", rep.adjointValue);
  std::printf("  %-10s %-22s %-12s\n", "eps", "central difference", "rel. error");
  for (const FdProbe& p : rep.probes)
    std::printf("  %-10.1e %-22.12e %-12.3e\n", p.eps, p.fdValue, p.relError);
  std::printf("  best relative error %.3e\n", rep.bestRelError);
  return 0;
}

int cmdTaylorTest(Session& s) {
  Rng rng(s.seed + 2);
  const ControlPair controls = s.scn.initialControls();
  ControlPerturbation dir;
  dir.h = rng.timeField(s.scn.time.nodes(), s.scn.grid, -0.5, 0.5);
  dir.k = rng.timeField(s.scn.time.nodes(), s.scn.grid, -0.5, 0.5);

  const Trajectory base = simulate(s.scn.phi0(), s.scn.sigma0(), controls, s.scn.time,
                                   s.scn.params, *s.table, s.scn.potential);
  const TangentTrajectory tan =
      tangentSolve(base, controls, dir, s.scn.params, *s.table, s.scn.potential);

  std::printf("taylor-test: remainder of S(c + eps d) - S(c) - eps T(d)\n");
  std::printf("  %-10s %-18s\n", "eps", "remainder");
  std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4}, rem;
  for (double e : eps) {
    ControlPair c = controls;
    for (int n = 0; n < c.u.nodeCount(); ++n) {
      axpy(e, dir.h[n], c.u[n]);
      axpy(e, dir.k[n], c.v[n]);
    }
    const Trajectory pert = simulate(s.scn.phi0(), s.scn.sigma0(), c, s.scn.time, s.scn.params,
                                     *s.table, s.scn.potential);
    rem.push_back(taylorRemainder(base, pert, tan, e));
    std::printf("  %-10.1e %-18.8e\n", eps[rem.size() - 1], rem.back());
  }
  // least-squares slope on the points above the solver-noise floor
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < rem.size(); ++i) {
    if (rem[i] <= 1e-14) continue;
    const double lx = std::log10(eps[i]), ly = std::log10(rem[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++m;
  }
  const double slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
  std::printf("  fitted slope %.3f (second-order remainder expected)\n", slope);
  return 0;
}

int cmdOptimize(Session& s) {
  const TargetData targets = s.scn.targets();
  std::FILE* hist = std::fopen(s.file("history.csv").c_str(), "w");
  if (!hist) throw Error("cannot open history output");
  std::fprintf(hist, "iter,cost,stationarity,step\n");
  auto log = [&](const IterRecord& r) {
    std::printf("iter=%d J=%.10e stationarity=%.3e step=%.3e\n", r.iter, r.cost, r.stationarity,
                r.step);
    std::fprintf(hist, "%d,%.17g,%.17g,%.17g\n", r.iter, r.cost, r.stationarity, r.step);
  };
  const OptimizeResult res =
      optimize(s.scn.phi0(), s.scn.sigma0(), s.scn.initialControls(), s.scn.weights, targets,
               s.scn.bounds(), s.scn.optimizer, s.scn.time, s.scn.params, *s.table,
               s.scn.potential, StepOptions{}, log);
  std::fclose(hist);
  exportTimeField(res.controls.u, s.scn.time, s.file("u.raw64"), ExportFormat::Raw64);
  exportTimeField(res.controls.v, s.scn.time, s.file("v.raw64"), ExportFormat::Raw64);
  exportTimeField(res.controls.u, s.scn.time, s.file("u.csv"), ExportFormat::Csv);
  exportTimeField(res.controls.v, s.scn.time, s.file("v.csv"), ExportFormat::Csv);
  std::printf("optimize: %s after %zu iterations, J = %.10e, kkt residual = %.3e\n",
              res.converged ? "converged" : "stopped", res.history.size(), res.finalCost,
              res.kktResidual);
  std::printf("  controls written to %s\n", s.out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  applyThreadCap();

  CLI::App app{"non-local Cahn-Hilliard tumour growth: simulation and optimal therapy control"};
  app.require_subcommand(1);
  std::string scenarioPath, outDir;
  long long seedOverride = -1;

  auto addCommon = [&](CLI::App* sub) {
    sub->add_option("scenario", scenarioPath, "scenario file (.scn)")->required();
    sub->add_option("--out", outDir, "output directory");
    sub->add_option("--seed", seedOverride, "override the scenario seed");
  };
  CLI::App* validate = app.add_subcommand("validate", "assumption audit only");
  CLI::App* simulateCmd = app.add_subcommand("simulate", "run the state system, export trajectory + monitors");
  CLI::App* energyCmd = app.add_subcommand("energy-report", "per-step energy, mass ledger, separation margin");
  CLI::App* gradCmd = app.add_subcommand("gradient-check", "adjoint gradient vs central differences");
  CLI::App* taylorCmd = app.add_subcommand("taylor-test", "tangent Taylor-remainder slopes");
  CLI::App* optCmd = app.add_subcommand("optimize", "projected-gradient therapy optimization");
  for (CLI::App* sub : {validate, simulateCmd, energyCmd, gradCmd, taylorCmd, optCmd})
    addCommon(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(validate)) return cmdValidate(scenarioPath);
    Session s = Session::open(scenarioPath, outDir, seedOverride);
    if (app.got_subcommand(simulateCmd)) return cmdSimulate(s);
    if (app.got_subcommand(energyCmd)) return cmdEnergyReport(s);
    if (app.got_subcommand(gradCmd)) return cmdGradientCheck(s);
    if (app.got_subcommand(taylorCmd)) return cmdTaylorTest(s);
    if (app.got_subcommand(optCmd)) return cmdOptimize(s);
  } catch (const ScenarioValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation failure: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime failure: %s\n", e.what());
    return 2;
  }
  return 1;
}
