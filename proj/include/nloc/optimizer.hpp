// Projected-gradient minimization of the reduced cost over U_ad x V_ad.
//
// V_ad is a pointwise box: its L2(Q_T) projection is the clamp
//   v |-> min(v_max, max(v, v_min)).
// U_ad adds the H1(0,T;H)-ball ||u|| <= M; the projection onto box-and-ball
// is computed by Dykstra's alternating scheme (pointwise clamp / radial
// scaling in the discrete H1 inner product).
#pragma once

#include "nloc/adjoint.hpp"
#include "nloc/tangent.hpp"

#include <functional>
#include <vector>

namespace nloc {

struct OptimizerConfig {
  int maxIters = 100;
  double armijoInitStep = 1.0;
  double armijoShrink = 0.5;
  double armijoC = 1e-4;        // sufficient-decrease constant
  double stationarityTol = 1e-6;
  int dykstraMaxSweeps = 500;
  double dykstraTol = 1e-12;

  void validate() const {
    if (maxIters < 1) throw ValidationError("optimizer", "maxIters must be >= 1");
    if (!(armijoInitStep > 0.0)) throw ValidationError("optimizer", "initial step must be > 0");
    if (!(armijoShrink > 0.0 && armijoShrink < 1.0))
      throw ValidationError("optimizer", "shrink factor must be in (0,1)");
    if (!(armijoC > 0.0 && armijoC < 1.0))
      throw ValidationError("optimizer", "sufficient-decrease constant must be in (0,1)");
    if (!(stationarityTol > 0.0) || !(dykstraTol > 0.0))
      throw ValidationError("optimizer", "tolerances must be > 0");
    if (dykstraMaxSweeps < 1) throw ValidationError("optimizer", "dykstra sweeps must be >= 1");
  }
};

struct IterRecord {
  int iter = 0;
  double cost = 0.0;
  double stationarity = 0.0;
  double step = 0.0;
};

struct OptimizeResult {
  ControlPair controls;
  std::vector<IterRecord> history;
  double kktResidual = 0.0;
  bool converged = false;
  double finalCost = 0.0;
};

// pointwise clamp; idempotent and L2-nonexpansive
TimeField projectV(const TimeField& v, const ControlBounds& bounds);

// Dykstra box-and-ball projection; result feasible for both constraints to
// the configured tolerance
TimeField projectU(const TimeField& u, const ControlBounds& bounds, double dt,
                   const OptimizerConfig& cfg);

// ||c - Proj(c - g)||_{L2(Q_T)} with unit probe step
double stationarity(const ControlPair& c, const TimeField& gU, const TimeField& gV,
                    const ControlBounds& bounds, double dt, const OptimizerConfig& cfg);

OptimizeResult optimize(const ScalarField& phi0, const ScalarField& sigma0,
                        const ControlPair& initial, const CostWeights& weights,
                        const TargetData& targets, const ControlBounds& bounds,
                        const OptimizerConfig& cfg, const TimeGrid& time,
                        const ModelParams& params, const KernelTable& kernel,
                        const PotentialSpec& potential, StepOptions stepOpts = {},
                        const std::function<void(const IterRecord&)>& log = nullptr);

struct FdProbe {
  double eps = 0.0;
  double fdValue = 0.0;    // central difference of the reduced cost
  double relError = 0.0;   // against the adjoint directional derivative
};

struct FdReport {
  double adjointValue = 0.0;  // <g, direction>_{L2(Q_T)}
  std::vector<FdProbe> probes;
  double bestRelError = 0.0;
};

// Central-difference verification of the adjoint gradient along a fixed
// direction, over a ladder of step sizes.
FdReport fdGradientOracle(const ScalarField& phi0, const ScalarField& sigma0,
                          const ControlPair& controls, const ControlPerturbation& direction,
                          const std::vector<double>& epsLadder, const CostWeights& weights,
                          const TargetData& targets, const TimeGrid& time,
                          const ModelParams& params, const KernelTable& kernel,
                          const PotentialSpec& potential, StepOptions stepOpts = {});

}  // namespace nloc
