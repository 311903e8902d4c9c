#include "nloc/adjoint.hpp"

#include <cmath>

namespace nloc {

double cost(const Trajectory& traj, const ControlPair& controls, const CostWeights& w,
            const TargetData& targets) {
  w.validate();
  const int N = traj.time.steps;
  const double dt = traj.time.dt();
  if (controls.u.nodeCount() != N + 1 || controls.v.nodeCount() != N + 1)
    throw Error("cost: control node count mismatch");
  if (targets.phiQ.nodeCount() != N + 1 || targets.sigmaQ.nodeCount() != N + 1)
    throw Error("cost: target node count mismatch");

  KahanSum acc;
  for (int n = 1; n <= N; ++n) {
    if (w.alphaQ > 0.0) {
      const ScalarField d = traj.at(n).phi - targets.phiQ[n];
      acc.add(0.5 * w.alphaQ * dt * inner(d, d));
    }
    if (w.betaQ > 0.0) {
      const ScalarField d = traj.at(n).sigma - targets.sigmaQ[n];
      acc.add(0.5 * w.betaQ * dt * inner(d, d));
    }
    if (w.alphaU > 0.0) acc.add(0.5 * w.alphaU * dt * inner(controls.u[n], controls.u[n]));
    if (w.betaV > 0.0) acc.add(0.5 * w.betaV * dt * inner(controls.v[n], controls.v[n]));
  }
  if (w.alphaOmega > 0.0) {
    const ScalarField d = traj.at(N).phi - targets.phiOmega;
    acc.add(0.5 * w.alphaOmega * inner(d, d));
  }
  if (w.betaOmega > 0.0) {
    const ScalarField d = traj.at(N).sigma - targets.sigmaOmega;
    acc.add(0.5 * w.betaOmega * inner(d, d));
  }
  return acc.value();
}

AdjointTrajectory adjointSolveSources(const Trajectory& base, const ControlPair& baseControls,
                                      const TimeField& srcPhi, const TimeField& srcSigma,
                                      const ScalarField& termPhi, const ScalarField& termSigma,
                                      const ModelParams& params, const KernelTable& kernel,
                                      const PotentialSpec& potential, StepOptions opts,
                                      TimeField* gradU, TimeField* gradV) {
  const int N = base.time.steps;
  const double dt = base.time.dt();
  const GridSpec& g = base.snapshots.front().phi.grid;
  if (srcPhi.nodeCount() != N + 1 || srcSigma.nodeCount() != N + 1)
    throw Error("adjointSolveSources: source node count mismatch");

  AdjointTrajectory adj;
  adj.time = base.time;
  adj.snapshots.assign(static_cast<std::size_t>(N + 1),
                       AdjointSnapshot{ScalarField(g), ScalarField(g), ScalarField(g)});
  if (gradU) *gradU = TimeField(N + 1, g);
  if (gradV) *gradV = TimeField(N + 1, g);

  StepSystem sys(g, dt, params, kernel, potential, opts);

  // backward state at node N: terminal condition plus the node-N source
  ScalarField lamPhi = termPhi + srcPhi[N];
  ScalarField lamSigma = termSigma + srcSigma[N];

  for (int n = N; n >= 1; --n) {
    AdjointSnapshot& s = adj.snapshots[static_cast<std::size_t>(n)];
    ScalarField lamPhiOld(g), lamSigmaOld(g);
    sys.adjointStep(base.at(n - 1), base.at(n), baseControls.u[n], lamPhi, lamSigma, s.p, s.q,
                    s.r, lamPhiOld, lamSigmaOld);
    if (gradU) {
      ScalarField& gu = (*gradU)[n];
      for (std::size_t k = 0; k < gu.size(); ++k)
        gu[k] = -dt * params.h(base.at(n - 1).phi[k]) * s.p[k];
    }
    if (gradV) (*gradV)[n] = dt * s.r;
    if (n > 1) {
      lamPhi = lamPhiOld + srcPhi[n - 1];
      lamSigma = lamSigmaOld + srcSigma[n - 1];
    }
  }
  return adj;
}

AdjointTrajectory adjointSolve(const Trajectory& base, const ControlPair& baseControls,
                               const CostWeights& w, const TargetData& targets,
                               const ModelParams& params, const KernelTable& kernel,
                               const PotentialSpec& potential, StepOptions opts) {
  const int N = base.time.steps;
  const double dt = base.time.dt();
  const GridSpec& g = base.snapshots.front().phi.grid;

  TimeField srcPhi(N + 1, g), srcSigma(N + 1, g);
  for (int n = 1; n <= N; ++n) {
    if (w.alphaQ > 0.0) srcPhi[n] = (w.alphaQ * dt) * (base.at(n).phi - targets.phiQ[n]);
    if (w.betaQ > 0.0) srcSigma[n] = (w.betaQ * dt) * (base.at(n).sigma - targets.sigmaQ[n]);
  }
  ScalarField termPhi(g), termSigma(g);
  if (w.alphaOmega > 0.0) termPhi = w.alphaOmega * (base.at(N).phi - targets.phiOmega);
  if (w.betaOmega > 0.0) termSigma = w.betaOmega * (base.at(N).sigma - targets.sigmaOmega);

  return adjointSolveSources(base, baseControls, srcPhi, srcSigma, termPhi, termSigma, params,
                             kernel, potential, opts);
}

void reducedGradient(const AdjointTrajectory& adj, const Trajectory& base,
                     const ControlPair& controls, const CostWeights& w, TimeField& gU,
                     TimeField& gV, const ModelParams& params) {
  const int N = base.time.steps;
  const GridSpec& g = base.snapshots.front().phi.grid;
  gU = TimeField(N + 1, g);
  gV = TimeField(N + 1, g);
  for (int n = 1; n <= N; ++n) {
    const AdjointSnapshot& s = adj.snapshots[static_cast<std::size_t>(n)];
    for (std::size_t k = 0; k < gU[n].size(); ++k)
      gU[n][k] = -params.h(base.at(n - 1).phi[k]) * s.p[k] + w.alphaU * controls.u[n][k];
    gV[n] = s.r + w.betaV * controls.v[n];
  }
}

}  // namespace nloc
