// Tangent (linearised) system along a frozen base trajectory, implemented
// as the exact derivative of the discrete forward step, so the adjoint is
// its exact transpose and gradient tests close at solver precision.
#pragma once

#include "nloc/state_solver.hpp"

namespace nloc {

struct LinearisedSnapshot {
  ScalarField xi;   // tangent of phi
  ScalarField eta;  // tangent of mu
  ScalarField rho;  // tangent of sigma
};

struct ControlPerturbation {
  TimeField h;  // perturbation of u
  TimeField k;  // perturbation of v
};

struct TangentTrajectory {
  TimeGrid time;
  std::vector<LinearisedSnapshot> snapshots;  // steps + 1, node 0 has xi = rho = 0
};

// Tangent of initialMu: the elliptic operator is control-independent, only
// the -tau h(phi0) u(0) source differentiates.
ScalarField initialMuTangent(const ScalarField& phi0, const ScalarField& h0,
                             const ModelParams& params, const KernelTable& kernel,
                             const PotentialSpec& potential);

TangentTrajectory tangentSolve(const Trajectory& base, const ControlPair& baseControls,
                               const ControlPerturbation& pert, const ModelParams& params,
                               const KernelTable& kernel, const PotentialSpec& potential,
                               StepOptions opts = {});

// sqrt( sum_{n>=1} dt (||xi||^2 + ||eta||^2 + ||rho||^2) ); the norm used by
// the Taylor-remainder and continuous-dependence studies.
double tangentNormQT(const TangentTrajectory& t);

// || S(c + eps d) - S(c) - eps T(d) || in the tangent norm above; the
// second-order remainder behind the Frechet differentiability check.
double taylorRemainder(const Trajectory& base, const Trajectory& perturbed,
                       const TangentTrajectory& tangent, double eps);

// || traj1 - traj2 || in the same norm (continuous-dependence studies).
double trajectoryDistQT(const Trajectory& a, const Trajectory& b);

}  // namespace nloc
