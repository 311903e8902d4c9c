// State, trajectory and control containers shared by the forward, tangent
// and adjoint solvers.
#pragma once

#include "nloc/field.hpp"
#include "nloc/ops.hpp"

#include <vector>

namespace nloc {

struct StateSnapshot {
  ScalarField phi;    // order parameter
  ScalarField mu;     // chemical potential
  ScalarField sigma;  // nutrient
};

// One ScalarField per time node (0..steps); carrier for controls,
// perturbations, gradients and space-time targets.
struct TimeField {
  std::vector<ScalarField> nodes;

  TimeField() = default;
  TimeField(int nodeCount, const GridSpec& g) : nodes(nodeCount, ScalarField(g)) {}
  int nodeCount() const { return static_cast<int>(nodes.size()); }
  ScalarField& operator[](int n) { return nodes[static_cast<std::size_t>(n)]; }
  const ScalarField& operator[](int n) const { return nodes[static_cast<std::size_t>(n)]; }
};

// L2(Q_T) pairing with right-endpoint rectangle rule (nodes 1..N), the same
// quadrature used by the cost functional.
double innerQT(const TimeField& a, const TimeField& b, double dt);
double normQT(const TimeField& a, double dt);

// Discrete H1(0,T;H) squared norm: sum_n dt ||u^n||^2 + sum_n dt ||(u^n - u^{n-1})/dt||^2.
double h1TimeNormSq(const TimeField& u, double dt);

struct StepMonitor {
  double time = 0.0;
  double mass = 0.0;          // int (phi + sigma)
  double massResidual = 0.0;  // defect of the per-step discrete mass identity
  double energy = 0.0;
  double maxAbsPhi = 0.0;
  int newtonIters = 0;
};

struct Trajectory {
  TimeGrid time;
  std::vector<StateSnapshot> snapshots;  // steps + 1, including t = 0
  std::vector<StepMonitor> monitors;     // one per step

  const StateSnapshot& at(int node) const { return snapshots[static_cast<std::size_t>(node)]; }
};

// Admissible-set data for (u, v): box bounds (constant in time) and the
// H1(0,T;H)-ball radius M for u.
struct ControlBounds {
  ScalarField uMin, uMax, vMin, vMax;
  double M = 0.0;

  void validate() const {
    for (std::size_t k = 0; k < uMin.size(); ++k) {
      if (uMin[k] < 0.0) throw ValidationError("C3", "u_min must be >= 0 a.e.");
      if (uMin[k] > uMax[k]) throw ValidationError("C3", "u_min must be <= u_max pointwise");
    }
    for (std::size_t k = 0; k < vMin.size(); ++k)
      if (vMin[k] > vMax[k]) throw ValidationError("C3", "v_min must be <= v_max pointwise");
    if (!(M > 0.0)) throw ValidationError("C3", "H1-ball radius M must be > 0");
  }
};

struct ControlPair {
  TimeField u, v;

  bool uInBox(const ControlBounds& b, double tol = 0.0) const;
  bool vInBox(const ControlBounds& b, double tol = 0.0) const;
  bool uInBall(const ControlBounds& b, double dt, double tol = 0.0) const;
};

struct SeparationReport {
  double maxAbsPhi = 0.0;
  double margin = 0.0;  // l - max (infinite for the regular potential)
  bool breached = false;
};

}  // namespace nloc
