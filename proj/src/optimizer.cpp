#include "nloc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nloc {

namespace {

// l2-style metric over all nodes (includes node 0), used only as a Dykstra
// stopping measure
double allNodesDist(const TimeField& a, const TimeField& b, double dt) {
  KahanSum acc;
  for (int n = 0; n < a.nodeCount(); ++n) {
    const ScalarField d = a[n] - b[n];
    acc.add(dt * inner(d, d));
  }
  return std::sqrt(acc.value());
}

TimeField clampBox(const TimeField& f, const ScalarField& lo, const ScalarField& hi) {
  TimeField out = f;
  for (ScalarField& node : out.nodes)
    for (std::size_t k = 0; k < node.size(); ++k)
      node[k] = std::min(hi[k], std::max(node[k], lo[k]));
  return out;
}

double boxViolation(const TimeField& f, const ScalarField& lo, const ScalarField& hi) {
  double worst = 0.0;
  for (const ScalarField& node : f.nodes)
    for (std::size_t k = 0; k < node.size(); ++k)
      worst = std::max({worst, lo[k] - node[k], node[k] - hi[k]});
  return worst;
}

}  // namespace

TimeField projectV(const TimeField& v, const ControlBounds& bounds) {
  for (std::size_t k = 0; k < bounds.vMin.size(); ++k)
    if (bounds.vMin[k] > bounds.vMax[k])
      throw ValidationError("C3", "projectV: inverted bounds (v_min > v_max)");
  return clampBox(v, bounds.vMin, bounds.vMax);
}

TimeField projectU(const TimeField& u, const ControlBounds& bounds, double dt,
                   const OptimizerConfig& cfg) {
  for (std::size_t k = 0; k < bounds.uMin.size(); ++k)
    if (bounds.uMin[k] > bounds.uMax[k])
      throw ValidationError("C3", "projectU: inverted bounds (u_min > u_max)");
  if (!(bounds.M > 0.0)) throw ValidationError("C3", "projectU: ball radius M must be > 0");

  const GridSpec& g = u.nodes.front().grid;
  TimeField x = u;
  TimeField incBox(u.nodeCount(), g), incBall(u.nodeCount(), g);
  const double feasTol = 1e-10 * std::max(1.0, bounds.M);

  for (int sweep = 0; sweep < cfg.dykstraMaxSweeps; ++sweep) {
    // box leg
    TimeField y(u.nodeCount(), g);
    for (int n = 0; n < x.nodeCount(); ++n) y[n] = x[n] + incBox[n];
    TimeField yc = clampBox(y, bounds.uMin, bounds.uMax);
    for (int n = 0; n < x.nodeCount(); ++n) incBox[n] = y[n] - yc[n];
    // ball leg (radial scaling in the H1(0,T;H) inner product)
    TimeField z(u.nodeCount(), g);
    for (int n = 0; n < x.nodeCount(); ++n) z[n] = yc[n] + incBall[n];
    const double norm = std::sqrt(h1TimeNormSq(z, dt));
    TimeField zc = z;
    if (norm > bounds.M) {
      const double scale = bounds.M / norm;
      for (ScalarField& node : zc.nodes)
        for (double& val : node.v) val *= scale;
    }
    for (int n = 0; n < x.nodeCount(); ++n) incBall[n] = z[n] - zc[n];

    const double change = allNodesDist(zc, x, dt);
    x = zc;
    const double bv = boxViolation(x, bounds.uMin, bounds.uMax);
    const double excess = std::sqrt(h1TimeNormSq(x, dt)) - bounds.M;
    if (change <= cfg.dykstraTol && bv <= feasTol && excess <= feasTol) return x;
  }
  const double bv = boxViolation(x, bounds.uMin, bounds.uMax);
  const double excess = std::sqrt(h1TimeNormSq(x, dt)) - bounds.M;
  if (bv > 1e-8 || excess > 1e-8 * std::max(1.0, bounds.M))
    throw SolverError(
        "projectU: Dykstra did not reach a feasible point after " +
        std::to_string(cfg.dykstraMaxSweeps) +
        " sweeps (box violation " + std::to_string(bv) + ", ball excess " +
        std::to_string(excess) + "); the box and the H1-ball may not intersect");
  return x;
}

namespace {

ControlPair projectPair(const ControlPair& c, const ControlBounds& bounds, double dt,
                        const OptimizerConfig& cfg) {
  ControlPair out;
  out.u = projectU(c.u, bounds, dt, cfg);
  out.v = projectV(c.v, bounds);
  return out;
}

ControlPair stepCandidate(const ControlPair& c, const TimeField& gU, const TimeField& gV,
                          double s, const ControlBounds& bounds, double dt,
                          const OptimizerConfig& cfg) {
  ControlPair trial = c;
  for (int n = 0; n < trial.u.nodeCount(); ++n) {
    axpy(-s, gU[n], trial.u[n]);
    axpy(-s, gV[n], trial.v[n]);
  }
  return projectPair(trial, bounds, dt, cfg);
}

double pairDistSq(const ControlPair& a, const ControlPair& b, double dt) {
  KahanSum acc;
  for (int n = 1; n < a.u.nodeCount(); ++n) {
    const ScalarField du = a.u[n] - b.u[n];
    const ScalarField dv = a.v[n] - b.v[n];
    acc.add(dt * (inner(du, du) + inner(dv, dv)));
  }
  return acc.value();
}

}  // namespace

double stationarity(const ControlPair& c, const TimeField& gU, const TimeField& gV,
                    const ControlBounds& bounds, double dt, const OptimizerConfig& cfg) {
  const ControlPair moved = stepCandidate(c, gU, gV, 1.0, bounds, dt, cfg);
  return std::sqrt(pairDistSq(c, moved, dt));
}

OptimizeResult optimize(const ScalarField& phi0, const ScalarField& sigma0,
                        const ControlPair& initial, const CostWeights& weights,
                        const TargetData& targets, const ControlBounds& bounds,
                        const OptimizerConfig& cfg, const TimeGrid& time,
                        const ModelParams& params, const KernelTable& kernel,
                        const PotentialSpec& potential, StepOptions stepOpts,
                        const std::function<void(const IterRecord&)>& log) {
  cfg.validate();
  weights.validate();
  bounds.validate();
  const double dt = time.dt();

  ControlPair cur = projectPair(initial, bounds, dt, cfg);
  Trajectory traj = simulate(phi0, sigma0, cur, time, params, kernel, potential, stepOpts);
  double J = cost(traj, cur, weights, targets);

  OptimizeResult res;
  double step = cfg.armijoInitStep;
  for (int iter = 1; iter <= cfg.maxIters; ++iter) {
    AdjointTrajectory adj =
        adjointSolve(traj, cur, weights, targets, params, kernel, potential, stepOpts);
    TimeField gU, gV;
    reducedGradient(adj, traj, cur, weights, gU, gV, params);

    const double stat = stationarity(cur, gU, gV, bounds, dt, cfg);
    IterRecord rec{iter, J, stat, step};
    res.history.push_back(rec);
    if (log) log(rec);
    res.kktResidual = stat;
    if (stat <= cfg.stationarityTol) {
      res.converged = true;
      break;
    }

    // Armijo backtracking on the projected-gradient arc
    bool accepted = false;
    bool anyEvaluated = false;
    bool pgFixedPoint = false;
    for (int ls = 0; ls < 60; ++ls) {
      ControlPair cand = stepCandidate(cur, gU, gV, step, bounds, dt, cfg);
      const double distSq = pairDistSq(cand, cur, dt);
      if (distSq == 0.0) {  // projection absorbed the whole step
        pgFixedPoint = true;
        break;
      }
      Trajectory candTraj;
      double Jc;
      try {
        candTraj = simulate(phi0, sigma0, cand, time, params, kernel, potential, stepOpts);
        Jc = cost(candTraj, cand, weights, targets);
        anyEvaluated = true;
      } catch (const SolverError&) {
        step *= cfg.armijoShrink;  // forward solver failed; retry shorter
        continue;
      }
      if (Jc <= J - cfg.armijoC / step * distSq) {
        cur = std::move(cand);
        traj = std::move(candTraj);
        J = Jc;
        accepted = true;
        step = std::min(step * 1.5, 1e3 * cfg.armijoInitStep);
        break;
      }
      step *= cfg.armijoShrink;
    }
    if (!accepted) {
      if (!anyEvaluated && !pgFixedPoint)
        throw SolverError("optimize: forward solver failed at every line-search step");
      break;  // stationary point of the PG map, or the numerical decrease floor
    }
  }

  res.controls = std::move(cur);
  res.finalCost = J;
  return res;
}

FdReport fdGradientOracle(const ScalarField& phi0, const ScalarField& sigma0,
                          const ControlPair& controls, const ControlPerturbation& direction,
                          const std::vector<double>& epsLadder, const CostWeights& weights,
                          const TargetData& targets, const TimeGrid& time,
                          const ModelParams& params, const KernelTable& kernel,
                          const PotentialSpec& potential, StepOptions stepOpts) {
  const double dt = time.dt();
  double dirNorm = 0.0;
  for (int n = 0; n < direction.h.nodeCount(); ++n)
    dirNorm += inner(direction.h[n], direction.h[n]) + inner(direction.k[n], direction.k[n]);
  if (!(dirNorm > 0.0)) throw Error("fdGradientOracle: direction must be nonzero");

  Trajectory base = simulate(phi0, sigma0, controls, time, params, kernel, potential, stepOpts);
  AdjointTrajectory adj =
      adjointSolve(base, controls, weights, targets, params, kernel, potential, stepOpts);
  TimeField gU, gV;
  reducedGradient(adj, base, controls, weights, gU, gV, params);

  FdReport rep;
  rep.adjointValue = innerQT(gU, direction.h, dt) + innerQT(gV, direction.k, dt);

  auto shifted = [&](double s) {
    ControlPair c = controls;
    for (int n = 0; n < c.u.nodeCount(); ++n) {
      axpy(s, direction.h[n], c.u[n]);
      axpy(s, direction.k[n], c.v[n]);
    }
    Trajectory t = simulate(phi0, sigma0, c, time, params, kernel, potential, stepOpts);
    return cost(t, c, weights, targets);
  };

  rep.bestRelError = std::numeric_limits<double>::infinity();
  for (double eps : epsLadder) {
    FdProbe probe;
    probe.eps = eps;
    probe.fdValue = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
    probe.relError = std::fabs(probe.fdValue - rep.adjointValue) /
                     std::max(1e-300, std::fabs(rep.adjointValue));
    rep.bestRelError = std::min(rep.bestRelError, probe.relError);
    rep.probes.push_back(probe);
  }
  return rep;
}

}  // namespace nloc
