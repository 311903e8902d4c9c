// Backward-in-time adjoint of the discrete tangent map, plus the tracking
// cost and the reduced gradient
//   g_u = -h(phi) p + alpha_u u,   g_v = r + beta_v v.
//
// Each backward step solves the transpose of the corresponding tangent
// step; the evolved backward unknown is the combination p + tau q (the
// final condition of the continuous adjoint), with q recovered from the
// transposed mu-row algebraically.
#pragma once

#include "nloc/state_solver.hpp"

namespace nloc {

struct AdjointSnapshot {
  ScalarField p;
  ScalarField q;
  ScalarField r;
};

struct AdjointTrajectory {
  TimeGrid time;
  // nodes 0..steps; node 0 is unused (zeros) since no step is attached to it
  std::vector<AdjointSnapshot> snapshots;
};

struct CostWeights {
  double alphaOmega = 0.0;  // final-time phi tracking
  double alphaQ = 0.0;      // running phi tracking
  double betaOmega = 0.0;   // final-time sigma tracking
  double betaQ = 0.0;       // running sigma tracking
  double alphaU = 0.0;      // u penalty
  double betaV = 0.0;       // v penalty

  void validate() const {
    const double all[]{alphaOmega, alphaQ, betaOmega, betaQ, alphaU, betaV};
    double sum = 0.0;
    for (double w : all) {
      if (!(w >= 0.0)) throw ValidationError("C1", "cost weights must be >= 0");
      sum += w;
    }
    if (!(sum > 0.0)) throw ValidationError("C1", "cost weights must not all be 0");
  }
};

struct TargetData {
  ScalarField phiOmega;   // final phi target
  ScalarField sigmaOmega; // final sigma target
  TimeField phiQ;         // desired phi evolution
  TimeField sigmaQ;       // desired sigma evolution
};

// J = alphaOmega/2 ||phi(T)-phiOmega||^2 + alphaQ/2 int ||phi-phiQ||^2 + ...
// Time integrals use the right-endpoint rectangle rule (nodes 1..N), the
// quadrature matching the first-order scheme.
double cost(const Trajectory& traj, const ControlPair& controls, const CostWeights& w,
            const TargetData& targets);

// Generic transposed tangent sweep: sources (srcPhi, srcSigma) pair against
// (xi, rho) per node (nodes 1..N), terminal extras against node N. Returns
// the multipliers and, through gradU/gradV when non-null, the H-inner-product
// representatives gamma_u^n = -dt h(phi^{n-1}) p^n, gamma_v^n = dt r^n.
AdjointTrajectory adjointSolveSources(const Trajectory& base, const ControlPair& baseControls,
                                      const TimeField& srcPhi, const TimeField& srcSigma,
                                      const ScalarField& termPhi, const ScalarField& termSigma,
                                      const ModelParams& params, const KernelTable& kernel,
                                      const PotentialSpec& potential, StepOptions opts = {},
                                      TimeField* gradU = nullptr, TimeField* gradV = nullptr);

// Cost-driven adjoint: sources alphaQ dt (phi - phiQ), betaQ dt (sigma - sigmaQ),
// final conditions alphaOmega (phi(T) - phiOmega), betaOmega (sigma(T) - sigmaOmega).
AdjointTrajectory adjointSolve(const Trajectory& base, const ControlPair& baseControls,
                               const CostWeights& w, const TargetData& targets,
                               const ModelParams& params, const KernelTable& kernel,
                               const PotentialSpec& potential, StepOptions opts = {});

// Exact discrete gradient of the reduced cost w.r.t. the controls, as
// L2(Q_T) gradient fields on the control time grid (node 0 carries no
// quadrature weight and gets a zero gradient).
void reducedGradient(const AdjointTrajectory& adj, const Trajectory& base,
                     const ControlPair& controls, const CostWeights& w, TimeField& gU,
                     TimeField& gV, const ModelParams& params);

}  // namespace nloc
