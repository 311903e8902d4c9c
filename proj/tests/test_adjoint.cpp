#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

#include <cmath>

using namespace nloc;
using nloc::testing::Fixture;

namespace {

TargetData zeroTargets(const Fixture& f) {
  TargetData t;
  t.phiOmega = ScalarField(f.grid);
  t.sigmaOmega = ScalarField(f.grid);
  t.phiQ = TimeField(f.time.nodes(), f.grid);
  t.sigmaQ = TimeField(f.time.nodes(), f.grid);
  return t;
}

TargetData trackingTargets(const Fixture& f) {
  TargetData t = zeroTargets(f);
  t.phiOmega = nloc::testing::smoothPhi(f.grid, -0.3, 0.2);
  t.sigmaOmega = nloc::testing::smoothPhi(f.grid, 0.4, 0.1);
  for (int n = 0; n < f.time.nodes(); ++n) {
    t.phiQ[n] = t.phiOmega;
    t.sigmaQ[n] = t.sigmaOmega;
  }
  return t;
}

CostWeights trackingWeights() {
  CostWeights w;
  w.alphaOmega = 1.0;
  w.alphaQ = 0.5;
  w.betaOmega = 0.7;
  w.betaQ = 0.3;
  w.alphaU = 0.05;
  w.betaV = 0.05;
  return w;
}

}  // namespace

TEST_CASE("cost: exact matches and weight linearity") {
  const Fixture f = Fixture::make(false);
  const Trajectory traj = f.solve(nloc::testing::zeroControls(f.time, f.grid));

  SUBCASE("trajectory equal to its own targets with zero controls costs nothing") {
    TargetData t = zeroTargets(f);
    t.phiOmega = traj.at(f.time.steps).phi;
    t.sigmaOmega = traj.at(f.time.steps).sigma;
    for (int n = 0; n < f.time.nodes(); ++n) {
      t.phiQ[n] = traj.at(n).phi;
      t.sigmaQ[n] = traj.at(n).sigma;
    }
    CostWeights w = trackingWeights();
    CHECK(cost(traj, nloc::testing::zeroControls(f.time, f.grid), w, t) == 0.0);
  }

  SUBCASE("pure u-penalty of a constant control on the unit cylinder") {
    // alpha_u = 1, u = c on Omega = (0,1), T = 1: J = c^2/2 (rectangle rule
    // is exact for constants)
    const GridSpec g = GridSpec::line(1.0, 16);
    const TimeGrid time(1.0, 10);
    Trajectory dummy;
    dummy.time = time;
    dummy.snapshots.assign(static_cast<std::size_t>(time.nodes()),
                           StateSnapshot{ScalarField(g), ScalarField(g), ScalarField(g)});
    ControlPair c = nloc::testing::zeroControls(time, g);
    for (ScalarField& node : c.u.nodes) std::fill(node.v.begin(), node.v.end(), 0.8);
    CostWeights w;
    w.alphaU = 1.0;
    TargetData t;
    t.phiOmega = ScalarField(g);
    t.sigmaOmega = ScalarField(g);
    t.phiQ = TimeField(time.nodes(), g);
    t.sigmaQ = TimeField(time.nodes(), g);
    CHECK(cost(dummy, c, w, t) == doctest::Approx(0.8 * 0.8 / 2.0).epsilon(1e-12));
  }

  SUBCASE("doubling every weight doubles the cost") {
    TargetData t = trackingTargets(f);
    CostWeights w = trackingWeights();
    ControlPair c = f.controls;
    const double j1 = cost(traj, c, w, t);
    CostWeights w2 = w;
    w2.alphaOmega *= 2.0; w2.alphaQ *= 2.0; w2.betaOmega *= 2.0;
    w2.betaQ *= 2.0; w2.alphaU *= 2.0; w2.betaV *= 2.0;
    CHECK(cost(traj, c, w2, t) == doctest::Approx(2.0 * j1).epsilon(1e-14));
    CHECK(j1 > 0.0);
  }

  SUBCASE("all-zero weights are rejected (C1)") {
    CostWeights w;
    CHECK_THROWS_AS(w.validate(), ValidationError);
  }
}

TEST_CASE("zero tracking weights give a vanishing adjoint and g = (a_u u, b_v v)") {
  const Fixture f = Fixture::make(true);
  const Trajectory base = f.solve();
  CostWeights w;
  w.alphaU = 1.0;
  w.betaV = 2.0;
  const TargetData t = zeroTargets(f);
  const AdjointTrajectory adj =
      adjointSolve(base, f.controls, w, t, f.params, *f.table, f.potential);
  for (const AdjointSnapshot& s : adj.snapshots) {
    CHECK(maxAbs(s.p) == 0.0);
    CHECK(maxAbs(s.q) == 0.0);
    CHECK(maxAbs(s.r) == 0.0);
  }
  TimeField gU, gV;
  reducedGradient(adj, base, f.controls, w, gU, gV, f.params);
  for (int n = 1; n < f.time.nodes(); ++n) {
    CHECK(maxAbs(gU[n] - 1.0 * f.controls.u[n]) == 0.0);
    CHECK(maxAbs(gV[n] - 2.0 * f.controls.v[n]) == 0.0);
  }
}

TEST_CASE("h = 0 makes g_u independent of the adjoint") {
  Fixture f = Fixture::make(false);
  f.params.h = ReactionProfile::constant(0.0);
  const Trajectory base = f.solve();
  const CostWeights w = trackingWeights();
  const TargetData t = trackingTargets(f);
  const AdjointTrajectory adj =
      adjointSolve(base, f.controls, w, t, f.params, *f.table, f.potential);
  TimeField gU, gV;
  reducedGradient(adj, base, f.controls, w, gU, gV, f.params);
  double pNorm = 0.0;
  for (const AdjointSnapshot& s : adj.snapshots) pNorm = std::max(pNorm, maxAbs(s.p));
  CHECK(pNorm > 0.0);  // the adjoint itself is alive
  for (int n = 1; n < f.time.nodes(); ++n)
    CHECK(maxAbs(gU[n] - w.alphaU * f.controls.u[n]) == 0.0);
}

TEST_CASE("tangent/adjoint dot-product identity at solver precision") {
  for (bool logpot : {false, true}) {
    const Fixture f = Fixture::make(logpot);
    const Trajectory base = f.solve();
    Rng rng(logpot ? 91 : 92);

    ControlPerturbation d;
    d.h = rng.timeField(f.time.nodes(), f.grid, -1.0, 1.0);
    d.k = rng.timeField(f.time.nodes(), f.grid, -1.0, 1.0);
    const TangentTrajectory tan =
        tangentSolve(base, f.controls, d, f.params, *f.table, f.potential);

    TimeField srcPhi = rng.timeField(f.time.nodes(), f.grid, -1.0, 1.0);
    TimeField srcSigma = rng.timeField(f.time.nodes(), f.grid, -1.0, 1.0);
    srcPhi[0] = ScalarField(f.grid);  // node 0 carries no pairing
    srcSigma[0] = ScalarField(f.grid);
    const ScalarField termPhi = rng.field(f.grid, -1.0, 1.0);
    const ScalarField termSigma = rng.field(f.grid, -1.0, 1.0);

    TimeField gamU, gamV;
    adjointSolveSources(base, f.controls, srcPhi, srcSigma, termPhi, termSigma, f.params,
                        *f.table, f.potential, {}, &gamU, &gamV);

    KahanSum lhs;  // < T(h,k), sources >
    for (int n = 1; n <= f.time.steps; ++n) {
      lhs.add(inner(tan.snapshots[static_cast<std::size_t>(n)].xi, srcPhi[n]));
      lhs.add(inner(tan.snapshots[static_cast<std::size_t>(n)].rho, srcSigma[n]));
    }
    lhs.add(inner(tan.snapshots.back().xi, termPhi));
    lhs.add(inner(tan.snapshots.back().rho, termSigma));

    KahanSum rhs;  // < (h,k), T*(sources) >; gamma fields carry the dt factor
    for (int n = 1; n <= f.time.steps; ++n) {
      rhs.add(inner(d.h[n], gamU[n]));
      rhs.add(inner(d.k[n], gamV[n]));
    }
    CHECK(std::fabs(lhs.value() - rhs.value()) <=
          1e-11 * std::max(1.0, std::fabs(lhs.value())));
  }
}

TEST_CASE("adjoint gradient matches central differences in random directions") {
  for (bool logpot : {false, true}) {
    const Fixture f = Fixture::make(logpot);
    const CostWeights w = trackingWeights();
    const TargetData t = trackingTargets(f);
    for (std::uint64_t seed : {5ULL, 6ULL, 7ULL}) {
      Rng rng(seed);
      ControlPerturbation d;
      d.h = rng.timeField(f.time.nodes(), f.grid, -1.0, 1.0);
      d.k = rng.timeField(f.time.nodes(), f.grid, -1.0, 1.0);
      const FdReport rep =
          fdGradientOracle(f.phi0, f.sigma0, f.controls, d, {1e-5}, w, t, f.time, f.params,
                           *f.table, f.potential);
      CHECK(rep.probes.front().relError <= 1e-6);
    }
  }
}

TEST_CASE("adjoint homogeneity: scaled sources scale the multipliers") {
  const Fixture f = Fixture::make(false);
  const Trajectory base = f.solve();
  Rng rng(93);
  TimeField srcPhi = rng.timeField(f.time.nodes(), f.grid, -1.0, 1.0);
  TimeField srcSigma = rng.timeField(f.time.nodes(), f.grid, -1.0, 1.0);
  const ScalarField termPhi = rng.field(f.grid, -1.0, 1.0);
  const ScalarField termSigma = rng.field(f.grid, -1.0, 1.0);

  const AdjointTrajectory a1 = adjointSolveSources(base, f.controls, srcPhi, srcSigma, termPhi,
                                                   termSigma, f.params, *f.table, f.potential);
  const double s = 3.5;
  TimeField srcPhiS = srcPhi, srcSigmaS = srcSigma;
  for (int n = 0; n < f.time.nodes(); ++n) {
    srcPhiS[n] = s * srcPhi[n];
    srcSigmaS[n] = s * srcSigma[n];
  }
  const AdjointTrajectory a2 =
      adjointSolveSources(base, f.controls, srcPhiS, srcSigmaS, s * termPhi, s * termSigma,
                          f.params, *f.table, f.potential);
  for (int n = 1; n <= f.time.steps; ++n) {
    const AdjointSnapshot& s1 = a1.snapshots[static_cast<std::size_t>(n)];
    const AdjointSnapshot& s2 = a2.snapshots[static_cast<std::size_t>(n)];
    const double scale = 1.0 + maxAbs(s1.p) + maxAbs(s1.q) + maxAbs(s1.r);
    CHECK(maxAbs(s2.p - s * s1.p) <= 1e-11 * scale);
    CHECK(maxAbs(s2.q - s * s1.q) <= 1e-11 * scale);
    CHECK(maxAbs(s2.r - s * s1.r) <= 1e-11 * scale);
  }
}

TEST_CASE("discrete adjoint is consistent with the continuous adjoint system") {
  // Smooth base with unit mobilities (the form the continuous backward
  // system is stated in); the residuals of the p, q, r equations evaluated
  // on the discrete multipliers must shrink under (dt, h) refinement.
  auto residuals = [&](int cells, int steps) {
    Fixture f = Fixture::make(true, cells, steps);
    f.params.m = 1.0;
    f.params.n = 1.0;
    // time-smooth controls: the consistency claim presumes a smooth base
    for (int n = 0; n < f.time.nodes(); ++n) {
      const double tme = f.time.t(n);
      for (int iy = 0; iy < f.grid.ny(); ++iy)
        for (int ix = 0; ix < f.grid.nx(); ++ix) {
          const double sx = std::sin(M_PI * f.grid.x(ix));
          f.controls.u[n].at(ix, iy) = 0.3 * (1.0 + std::sin(2.0 * M_PI * tme)) * sx;
          f.controls.v[n].at(ix, iy) = 0.2 * std::cos(2.0 * M_PI * tme) * sx;
        }
    }
    const Trajectory base = f.solve();
    const CostWeights w = trackingWeights();
    const TargetData t = trackingTargets(f);
    const AdjointTrajectory adj =
        adjointSolve(base, f.controls, w, t, f.params, *f.table, f.potential);

    const double dt = f.time.dt();
    const double chi = f.params.chi, A = f.params.A, B = f.params.B, tau = f.params.tau;
    double worstP = 0.0, worstQ = 0.0, worstR = 0.0;
    for (int n = 1; n < f.time.steps; ++n) {  // interior nodes
      const AdjointSnapshot& cur = adj.snapshots[static_cast<std::size_t>(n)];
      const AdjointSnapshot& nxt = adj.snapshots[static_cast<std::size_t>(n + 1)];
      const StateSnapshot& bs = base.at(n);
      const ScalarField lapP = laplacianNeumann(cur.p);
      const ScalarField lapR = laplacianNeumann(cur.r);
      const ScalarField convQ = f.table->convolve(cur.q);
      for (std::size_t k = 0; k < f.grid.totalCells(); ++k) {
        const double S = bs.sigma[k] + chi * (1.0 - bs.phi[k]) - bs.mu[k];
        const double pq = cur.p[k] - cur.r[k];
        const double dtPQ =
            ((nxt.p[k] + tau * nxt.q[k]) - (cur.p[k] + tau * cur.q[k])) / dt;
        const double rp = -dtPQ + A * f.potential.eval(2, bs.phi[k]) * cur.q[k] +
                          B * f.table->aField()[k] * cur.q[k] - B * convQ[k] + chi * lapR[k] +
                          chi * f.params.P(bs.phi[k]) * pq -
                          f.params.P.derivative(bs.phi[k]) * S * pq +
                          cur.p[k] * f.params.h.derivative(bs.phi[k]) * f.controls.u[n][k] -
                          w.alphaQ * (bs.phi[k] - t.phiQ[n][k]);
        const double rq = -cur.q[k] - lapP[k] + f.params.P(bs.phi[k]) * pq;
        const double rr = -(nxt.r[k] - cur.r[k]) / dt - lapR[k] - chi * cur.q[k] -
                          f.params.P(bs.phi[k]) * pq - w.betaQ * (bs.sigma[k] - t.sigmaQ[n][k]);
        worstP = std::max(worstP, std::fabs(rp));
        worstQ = std::max(worstQ, std::fabs(rq));
        worstR = std::max(worstR, std::fabs(rr));
      }
    }
    return std::array<double, 3>{worstP, worstQ, worstR};
  };

  const auto coarse = residuals(24, 16);
  const auto fine = residuals(48, 64);  // dt/4, h/2
  for (int i = 0; i < 3; ++i) {
    CHECK(fine[i] < 0.6 * coarse[i]);
  }
}

TEST_CASE("discrete final condition reproduces (p + tau q)(T) at first order") {
  auto defect = [&](int steps) {
    Fixture f = Fixture::make(false, 24, steps);
    const Trajectory base = f.solve();
    CostWeights w;
    w.alphaOmega = 1.0;
    w.betaOmega = 0.5;
    const TargetData t = trackingTargets(f);
    const AdjointTrajectory adj =
        adjointSolve(base, f.controls, w, t, f.params, *f.table, f.potential);
    const AdjointSnapshot& sN = adj.snapshots.back();
    const ScalarField combo = sN.p + f.params.tau * sN.q;
    const ScalarField target = w.alphaOmega * (base.at(f.time.steps).phi - t.phiOmega);
    const ScalarField rT = w.betaOmega * (base.at(f.time.steps).sigma - t.sigmaOmega);
    return std::max(maxAbs(combo - target), maxAbs(sN.r - rT));
  };
  const double d1 = defect(16), d2 = defect(32);
  CHECK(d2 < 0.7 * d1);  // O(dt) defect against the continuous final condition
}
