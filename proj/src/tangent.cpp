#include "nloc/tangent.hpp"

#include <cmath>

namespace nloc {

ScalarField initialMuTangent(const ScalarField& phi0, const ScalarField& h0,
                             const ModelParams& params, const KernelTable& kernel,
                             const PotentialSpec& potential) {
  // same SPD operator as initialMu, source dfrac = -tau h(phi0) h0
  ScalarField zero(phi0.grid);
  ScalarField mu0 = initialMu(phi0, zero, zero, params, kernel, potential);
  // Reuse via linearity: initialMu is affine in u(0); the tangent is the
  // difference of two solves with the operator fixed by phi0.
  ScalarField mu1 = initialMu(phi0, zero, h0, params, kernel, potential);
  return mu1 - mu0;
}

TangentTrajectory tangentSolve(const Trajectory& base, const ControlPair& baseControls,
                               const ControlPerturbation& pert, const ModelParams& params,
                               const KernelTable& kernel, const PotentialSpec& potential,
                               StepOptions opts) {
  const int nodes = base.time.nodes();
  if (pert.h.nodeCount() != nodes || pert.k.nodeCount() != nodes)
    throw Error("tangentSolve: perturbation must carry one field per time node");
  const GridSpec& g = base.snapshots.front().phi.grid;

  TangentTrajectory out;
  out.time = base.time;
  out.snapshots.resize(static_cast<std::size_t>(nodes));
  out.snapshots[0].xi = ScalarField(g);
  out.snapshots[0].rho = ScalarField(g);
  out.snapshots[0].eta = initialMuTangent(base.snapshots[0].phi, pert.h[0], params, kernel,
                                          potential);

  StepSystem sys(g, base.time.dt(), params, kernel, potential, opts);
  for (int n = 0; n < base.time.steps; ++n) {
    const LinearisedSnapshot& prev = out.snapshots[static_cast<std::size_t>(n)];
    LinearisedSnapshot& next = out.snapshots[static_cast<std::size_t>(n + 1)];
    sys.tangentStep(base.at(n), base.at(n + 1), baseControls.u[n + 1], prev.xi, prev.rho,
                    pert.h[n + 1], pert.k[n + 1], next.xi, next.eta, next.rho);
  }
  return out;
}

double tangentNormQT(const TangentTrajectory& t) {
  const double dt = t.time.dt();
  KahanSum acc;
  for (std::size_t n = 1; n < t.snapshots.size(); ++n) {
    const LinearisedSnapshot& s = t.snapshots[n];
    acc.add(dt * (inner(s.xi, s.xi) + inner(s.eta, s.eta) + inner(s.rho, s.rho)));
  }
  return std::sqrt(acc.value());
}

double taylorRemainder(const Trajectory& base, const Trajectory& perturbed,
                       const TangentTrajectory& tangent, double eps) {
  const double dt = base.time.dt();
  KahanSum acc;
  for (std::size_t n = 1; n < base.snapshots.size(); ++n) {
    const LinearisedSnapshot& s = tangent.snapshots[n];
    ScalarField dphi = perturbed.snapshots[n].phi - base.snapshots[n].phi;
    ScalarField dmu = perturbed.snapshots[n].mu - base.snapshots[n].mu;
    ScalarField dsigma = perturbed.snapshots[n].sigma - base.snapshots[n].sigma;
    axpy(-eps, s.xi, dphi);
    axpy(-eps, s.eta, dmu);
    axpy(-eps, s.rho, dsigma);
    acc.add(dt * (inner(dphi, dphi) + inner(dmu, dmu) + inner(dsigma, dsigma)));
  }
  return std::sqrt(acc.value());
}

double trajectoryDistQT(const Trajectory& a, const Trajectory& b) {
  const double dt = a.time.dt();
  KahanSum acc;
  for (std::size_t n = 1; n < a.snapshots.size(); ++n) {
    const ScalarField dphi = a.snapshots[n].phi - b.snapshots[n].phi;
    const ScalarField dmu = a.snapshots[n].mu - b.snapshots[n].mu;
    const ScalarField dsigma = a.snapshots[n].sigma - b.snapshots[n].sigma;
    acc.add(dt * (inner(dphi, dphi) + inner(dmu, dmu) + inner(dsigma, dsigma)));
  }
  return std::sqrt(acc.value());
}

}  // namespace nloc
