// Acceptance suite: one pass/fail line per criterion, exercised on the
// shipped demo scenarios at desk scale.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mms.hpp"
#include "nloc/nloc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace nloc;

namespace {

std::string scn(const char* name) { return std::string(NLOC_SCENARIO_DIR) + "/" + name; }

void verdict(int criterion, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %2d (%s): %s — %s\n", criterion, name, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

struct Demo {
  Scenario s;
  std::unique_ptr<KernelTable> table;

  static Demo load(const char* name) {
    Demo d;
    d.s = loadScenario(scn(name));
    d.table = buildKernelTable(d.s.kernel, d.s.grid);
    return d;
  }
  Trajectory run(const ControlPair& c) const {
    return simulate(s.phi0(), s.sigma0(), c, s.time, s.params, *table, s.potential);
  }
};

double fitSlope(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] <= floor) continue;
    const double lx = std::log10(x[i]), ly = std::log10(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

TEST_CASE("criterion 1: mass-balance exactness") {
  const Demo d = Demo::load("default.scn");
  ControlPair c = d.s.initialControls();  // u = 0
  for (ScalarField& node : c.v.nodes) std::fill(node.v.begin(), node.v.end(), 1.0);  // v = 1
  const Trajectory traj = d.run(c);
  double worst = 0.0;
  for (const StepMonitor& m : traj.monitors)
    worst = std::max(worst, std::fabs(m.massResidual));
  const bool pass = worst <= 1e-10;
  char buf[120];
  std::snprintf(buf, sizeof buf, "worst per-step identity residual %.3e <= 1e-10 over %zu steps",
                worst, traj.monitors.size());
  verdict(1, "mass balance", pass, buf);
  CHECK(pass);
}

TEST_CASE("criterion 2: energy-identity consistency") {
  const Demo d = Demo::load("default.scn");
  const double T = 0.2;
  auto residual = [&](double dt) {
    const TimeGrid time(T, static_cast<int>(std::lround(T / dt)));
    ControlPair c;
    c.u = TimeField(time.nodes(), d.s.grid);
    c.v = TimeField(time.nodes(), d.s.grid);
    const Trajectory traj =
        simulate(d.s.phi0(), d.s.sigma0(), c, time, d.s.params, *d.table, d.s.potential);
    // measured away from the t -> 0 initial layer (second half of the horizon)
    double worst = 0.0;
    for (int n = time.steps / 2; n < time.steps; ++n)
      worst = std::max(worst, std::fabs(energyIdentityResidual(
                                  traj.at(n), traj.at(n + 1), c.u[n + 1], c.v[n + 1], time.dt(),
                                  d.s.params, *d.table, d.s.potential)));
    return worst;
  };
  const double r1 = residual(4e-3), r2 = residual(2e-3), r3 = residual(1e-3);
  const double slope = 0.5 * (std::log2(r1 / r2) + std::log2(r2 / r3));
  const bool pass = slope >= 0.8 && slope <= 1.2;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "residuals %.3e / %.3e / %.3e at dt {4e-3, 2e-3, 1e-3}, slope %.3f in [0.8, 1.2]",
                r1, r2, r3, slope);
  verdict(2, "energy identity", pass, buf);
  CHECK(pass);
}

TEST_CASE("criterion 3: strict separation on the demo horizon") {
  const Demo d = Demo::load("default.scn");
  REQUIRE(maxAbs(d.s.phi0()) <= 0.9);
  bool domainErrorFired = false;
  SeparationReport rep;
  try {
    const Trajectory traj = d.run(d.s.initialControls());
    rep = separationReport(traj, d.s.potential);
  } catch (const SeparationError&) {
    domainErrorFired = true;
  }
  const bool pass = !domainErrorFired && !rep.breached && rep.maxAbsPhi < 1.0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "s* = max_t ||phi||_inf = %.6f, margin %.6f, F'-domain error %s",
                rep.maxAbsPhi, rep.margin, domainErrorFired ? "fired" : "never fired");
  verdict(3, "separation", pass, buf);
  CHECK(pass);
}

TEST_CASE("criterion 4: Frechet/Taylor remainder slope") {
  const Demo d = Demo::load("default.scn");
  const ControlPair base = d.s.initialControls();
  Rng rng(d.s.seed + 2);
  ControlPerturbation dir;
  dir.h = rng.timeField(d.s.time.nodes(), d.s.grid, -2.0, 2.0);
  dir.k = rng.timeField(d.s.time.nodes(), d.s.grid, -2.0, 2.0);

  const Trajectory baseTraj = d.run(base);
  const TangentTrajectory tan =
      tangentSolve(baseTraj, base, dir, d.s.params, *d.table, d.s.potential);

  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> rem;
  for (double e : eps) {
    ControlPair c = base;
    for (int n = 0; n < c.u.nodeCount(); ++n) {
      axpy(e, dir.h[n], c.u[n]);
      axpy(e, dir.k[n], c.v[n]);
    }
    rem.push_back(taylorRemainder(baseTraj, d.run(c), tan, e));
  }
  const double slope = fitSlope(eps, rem, 1e-14);
  const bool pass = slope >= 1.9 && slope <= 2.1;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "remainders %.2e / %.2e / %.2e / %.2e over eps {1e-1..1e-4}, slope %.3f in [1.9, 2.1]",
                rem[0], rem[1], rem[2], rem[3], slope);
  verdict(4, "taylor test", pass, buf);
  CHECK(pass);
}

TEST_CASE("criterion 5: adjoint correctness (dot test + gradient oracle)") {
  bool dotPass = true, gradPass = true;
  double worstDot = 0.0, worstGrad = 0.0;
  for (const bool logarithmic : {true, false}) {
    Demo d = Demo::load("default.scn");
    if (!logarithmic) d.s.potential = PotentialSpec::regularQuartic();
    Rng rng(d.s.seed + (logarithmic ? 10 : 20));

    ControlPair controls = d.s.initialControls();
    controls.u = rng.timeField(d.s.time.nodes(), d.s.grid, 0.0, 0.5);
    controls.v = rng.timeField(d.s.time.nodes(), d.s.grid, -0.3, 0.3);
    const Trajectory base = d.run(controls);

    // transposition identity with random tangent input and adjoint seed
    ControlPerturbation dir;
    dir.h = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
    dir.k = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
    const TangentTrajectory tan =
        tangentSolve(base, controls, dir, d.s.params, *d.table, d.s.potential);
    TimeField srcPhi = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
    TimeField srcSigma = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
    srcPhi[0] = ScalarField(d.s.grid);
    srcSigma[0] = ScalarField(d.s.grid);
    const ScalarField termPhi = rng.field(d.s.grid, -1.0, 1.0);
    const ScalarField termSigma = rng.field(d.s.grid, -1.0, 1.0);
    TimeField gamU, gamV;
    adjointSolveSources(base, controls, srcPhi, srcSigma, termPhi, termSigma, d.s.params,
                        *d.table, d.s.potential, {}, &gamU, &gamV);
    KahanSum lhs, rhs;
    for (int n = 1; n <= d.s.time.steps; ++n) {
      lhs.add(inner(tan.snapshots[static_cast<std::size_t>(n)].xi, srcPhi[n]));
      lhs.add(inner(tan.snapshots[static_cast<std::size_t>(n)].rho, srcSigma[n]));
      rhs.add(inner(dir.h[n], gamU[n]));
      rhs.add(inner(dir.k[n], gamV[n]));
    }
    lhs.add(inner(tan.snapshots.back().xi, termPhi));
    lhs.add(inner(tan.snapshots.back().rho, termSigma));
    const double rel =
        std::fabs(lhs.value() - rhs.value()) / std::max(1e-300, std::fabs(lhs.value()));
    worstDot = std::max(worstDot, rel);
    dotPass = dotPass && rel <= 1e-11;

    // central-difference oracle in three random directions
    for (int trial = 0; trial < 3; ++trial) {
      ControlPerturbation probe;
      probe.h = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
      probe.k = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
      const FdReport rep =
          fdGradientOracle(d.s.phi0(), d.s.sigma0(), controls, probe, {1e-5}, d.s.weights,
                           d.s.targets(), d.s.time, d.s.params, *d.table, d.s.potential);
      worstGrad = std::max(worstGrad, rep.probes.front().relError);
      gradPass = gradPass && rep.probes.front().relError <= 1e-6;
    }
  }
  const bool pass = dotPass && gradPass;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "dot-product identity rel <= %.2e (tol 1e-11); gradient vs central diff rel <= "
                "%.2e at eps 1e-5 (tol 1e-6), 3 directions x 2 potentials",
                worstDot, worstGrad);
  verdict(5, "adjoint correctness", pass, buf);
  CHECK(dotPass);
  CHECK(gradPass);
}

TEST_CASE("criterion 6: optimality on the tracking demo") {
  const Demo d = Demo::load("tracking.scn");
  const TargetData targets = d.s.targets();
  const ControlBounds bounds = d.s.bounds();
  const OptimizeResult res =
      optimize(d.s.phi0(), d.s.sigma0(), d.s.initialControls(), d.s.weights, targets, bounds,
               d.s.optimizer, d.s.time, d.s.params, *d.table, d.s.potential);

  bool monotone = true;
  for (std::size_t i = 1; i < res.history.size(); ++i)
    monotone = monotone && res.history[i].cost <= res.history[i - 1].cost + 1e-14;
  const bool statPass = res.kktResidual <= d.s.optimizer.stationarityTol;
  const bool decreased = res.finalCost < res.history.front().cost;
  // regression value recorded on the first successful run of this scenario
  const double recordedJ = 2.5847351620e-02;
  const bool regression = std::fabs(res.finalCost - recordedJ) <= 1e-4 * recordedJ;

  // sampled variational inequality over 100 random feasible controls
  const Trajectory traj = d.run(res.controls);
  const AdjointTrajectory adj =
      adjointSolve(traj, res.controls, d.s.weights, targets, d.s.params, *d.table, d.s.potential);
  TimeField gU, gV;
  reducedGradient(adj, traj, res.controls, d.s.weights, gU, gV, d.s.params);
  Rng rng(d.s.seed + 77);
  double worstSlack = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ControlPair cand;
    cand.u = rng.timeField(d.s.time.nodes(), d.s.grid, 0.0, 1.5);
    cand.v = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
    cand.u = projectU(cand.u, bounds, d.s.time.dt(), d.s.optimizer);
    double pairing = 0.0;
    for (int n = 1; n < d.s.time.nodes(); ++n) {
      pairing += d.s.time.dt() * inner(gU[n], cand.u[n] - res.controls.u[n]);
      pairing += d.s.time.dt() * inner(gV[n], cand.v[n] - res.controls.v[n]);
    }
    worstSlack = std::min(worstSlack, pairing);
  }
  const bool viPass = worstSlack >= -1e-5;
  const bool pass = statPass && monotone && decreased && viPass && regression;
  char buf[280];
  std::snprintf(buf, sizeof buf,
                "stationarity %.3e <= 1e-6 after %zu iterations, J %.6e -> %.6e %s (recorded "
                "%.6e), sampled variational inequality slack >= %.3e (tol -1e-5)",
                res.kktResidual, res.history.size(), res.history.front().cost, res.finalCost,
                monotone ? "nonincreasing" : "NOT monotone", recordedJ, worstSlack);
  verdict(6, "optimality", pass, buf);
  CHECK(statPass);
  CHECK(monotone);
  CHECK(decreased);
  CHECK(viPass);
  CHECK(regression);
}

TEST_CASE("criterion 7: projection formulas") {
  const Demo d = Demo::load("default.scn");
  const ControlBounds bounds = d.s.bounds();
  Rng rng(d.s.seed + 5);

  // project_V: pointwise-exact clamp of -r/beta_v (the explicit optimal-chemotherapy form)
  bool clampExact = true;
  const double betaV = d.s.weights.betaV;
  TimeField r = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
  TimeField cand(d.s.time.nodes(), d.s.grid);
  for (int n = 0; n < cand.nodeCount(); ++n)
    for (std::size_t k = 0; k < cand[n].size(); ++k) cand[n][k] = -r[n][k] / betaV;
  const TimeField pv = projectV(cand, bounds);
  for (int n = 0; n < cand.nodeCount() && clampExact; ++n)
    for (std::size_t k = 0; k < cand[n].size(); ++k)
      if (pv[n][k] !=
          std::min(bounds.vMax[k], std::max(-r[n][k] / betaV, bounds.vMin[k]))) {
        clampExact = false;
        break;
      }

  // project_U: feasibility for box and ball to 1e-8 and idempotence
  ControlBounds tight = bounds;
  tight.M = 0.4;  // make the ball bind
  const TimeField u = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 3.0);
  const TimeField pu = projectU(u, tight, d.s.time.dt(), d.s.optimizer);
  double boxViol = 0.0;
  for (const ScalarField& node : pu.nodes)
    for (std::size_t k = 0; k < node.size(); ++k)
      boxViol = std::max({boxViol, tight.uMin[k] - node[k], node[k] - tight.uMax[k]});
  const double ballExcess = std::sqrt(h1TimeNormSq(pu, d.s.time.dt())) - tight.M;
  const TimeField puu = projectU(pu, tight, d.s.time.dt(), d.s.optimizer);
  double idem = 0.0;
  for (int n = 0; n < pu.nodeCount(); ++n) idem = std::max(idem, maxAbs(puu[n] - pu[n]));

  const bool pass = clampExact && boxViol <= 1e-8 && ballExcess <= 1e-8 && idem <= 1e-8;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "clamp formula %s; box violation %.2e, ball excess %.2e, idempotence drift %.2e "
                "(all <= 1e-8)",
                clampExact ? "pointwise-exact" : "MISMATCH", boxViol, ballExcess, idem);
  verdict(7, "projection formulas", pass, buf);
  CHECK(pass);
}

TEST_CASE("criterion 8: continuous dependence on the controls") {
  const Demo d = Demo::load("default.scn");
  const ControlPair base = d.s.initialControls();
  Rng rng(d.s.seed + 6);
  const TimeField dh = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
  const TimeField dk = rng.timeField(d.s.time.nodes(), d.s.grid, -1.0, 1.0);
  const Trajectory ref = d.run(base);

  std::vector<double> ratios;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    ControlPair c = base;
    for (int n = 0; n < d.s.time.nodes(); ++n) {
      axpy(delta, dh[n], c.u[n]);
      axpy(delta, dk[n], c.v[n]);
    }
    ratios.push_back(trajectoryDistQT(d.run(c), ref) / delta);
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  const double spread = (hi - lo) / ratios[1];
  const bool pass = spread < 0.2;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "||dtraj||/delta = %.5f / %.5f / %.5f over delta {1e-2, 1e-3, 1e-4}, spread %.1f%% < 20%%",
                ratios[0], ratios[1], ratios[2], 100.0 * spread);
  verdict(8, "continuous dependence", pass, buf);
  CHECK(pass);
}

TEST_CASE("criterion 9: convolution oracle and self-adjointness") {
  const Demo d = Demo::load("default.scn");  // gaussian kernel on the 32^2 grid
  Rng rng(d.s.seed + 7);
  double worstDiff = 0.0, worstAdj = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const ScalarField f = rng.field(d.s.grid, -1.0, 1.0);
    const ScalarField g = rng.field(d.s.grid, -1.0, 1.0);
    worstDiff = std::max(worstDiff, maxAbs(d.table->convolve(f) - d.table->convolveDirect(f)));
    worstAdj = std::max(worstAdj, std::fabs(inner(d.table->convolve(f), g) -
                                            inner(f, d.table->convolve(g))));
  }
  const bool pass = worstDiff <= 1e-12 && worstAdj <= 1e-12;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "fast vs direct max |diff| %.2e, self-adjointness defect %.2e (both <= 1e-12, 32x32)",
                worstDiff, worstAdj);
  verdict(9, "convolution oracle", pass, buf);
  CHECK(pass);
}

TEST_CASE("criterion 10: manufactured-solution convergence orders") {
  const double Tt = 0.2;
  const auto [p1, s1] = mms::errorAt(256, Tt, 4e-3);
  const auto [p2, s2] = mms::errorAt(256, Tt, 2e-3);
  const auto [p3, s3] = mms::errorAt(256, Tt, 1e-3);
  const double orderDt =
      std::min(std::log2((p1 - p2) / (p2 - p3)), std::log2((s1 - s2) / (s2 - s3)));

  const double Ts = 0.05, dts = 2.5e-5;
  const auto [q1, t1] = mms::errorAt(16, Ts, dts);
  const auto [q2, t2] = mms::errorAt(32, Ts, dts);
  const auto [q3, t3] = mms::errorAt(64, Ts, dts);
  const double orderH =
      std::min(std::log2((q1 - q2) / (q2 - q3)), std::log2((t1 - t2) / (t2 - t3)));

  const bool pass = orderDt >= 0.95 && orderH >= 1.9;
  char buf[160];
  std::snprintf(buf, sizeof buf, "observed order %.3f in dt (>= 1) and %.3f in h (>= 2)",
                orderDt, orderH);
  verdict(10, "manufactured-solution convergence", pass, buf);
  CHECK(orderDt >= 0.95);
  CHECK(orderH >= 1.9);
}
