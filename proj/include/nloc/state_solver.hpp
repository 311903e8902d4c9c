// Time integration of the constant-mobility state system
//
//   phi_t  = m lap(mu) + P(phi)(sigma + chi(1-phi) - mu) - h(phi) u
//   mu     = tau phi_t + A F'(phi) + B a phi - B J*phi - chi sigma
//   sigma_t = n lap(sigma) - chi n lap(phi) - P(phi)(sigma + chi(1-phi) - mu) + v
//
// by a first-order semi-implicit scheme: the convolution J*phi^n and the
// reaction coefficients P(phi^n), h(phi^n) are frozen at the old time; the
// diffusion terms, the viscosity, B a phi and the convex part A F1' are
// implicit; F2' is explicit. The reaction arguments (sigma, mu, phi in the
// linear combination) are implicit, which makes the discrete mass identity
//
//   int (phi^{n+1}+sigma^{n+1}-phi^n-sigma^n) = dt int (-h(phi^n) u^{n+1} + v^{n+1})
//
// exact up to solver tolerance: the reaction term cancels between the two
// equations and the Neumann Laplacian has zero column sums.
#pragma once

#include "nloc/kernel.hpp"
#include "nloc/model.hpp"
#include "nloc/potential.hpp"
#include "nloc/state.hpp"

#include <memory>
#include <optional>

namespace nloc {

struct StepOptions {
  double newtonTol = 1e-12;  // l-inf of the nonlinear residual
  int maxNewtonIters = 30;
  // Moreau-Yosida fallback for the convex part: Direct uses F1' itself
  // (production; separation keeps it in range), Yosida replaces it by the
  // 1/lambda-Lipschitz regularization (the existence proof's approximation,
  // kept as a validation mode and rescue path).
  enum class ConvexPart { Direct, Yosida };
  ConvexPart convexPart = ConvexPart::Direct;
  double yosidaLambda = 1e-4;
};

// Per-(grid, dt, params, kernel, potential) solver machinery. Holds the
// assembled Neumann Laplacian and the sparse-solver plumbing. A StepSystem
// instance is single-threaded in its control flow; distinct instances may
// run concurrently.
class StepSystem {
 public:
  StepSystem(const GridSpec& grid, double dt, const ModelParams& params,
             const KernelTable& kernel, const PotentialSpec& potential,
             StepOptions opts = {});
  ~StepSystem();
  StepSystem(const StepSystem&) = delete;
  StepSystem& operator=(const StepSystem&) = delete;

  // One step old -> new; uNext/vNext are the controls at the new node.
  // Optional forcing fields (method-of-manufactured-solutions hook) are
  // added to the phi and sigma equations.
  StateSnapshot step(const StateSnapshot& old, const ScalarField& uNext,
                     const ScalarField& vNext, const ScalarField* forcePhi = nullptr,
                     const ScalarField* forceSigma = nullptr, int* newtonIters = nullptr) const;

  // Tangent of the discrete step (exact Jacobian action): given the base
  // pair (old, new), the incoming tangent (xi, rho) and control
  // perturbations at the new node, returns (xi, eta, rho) at the new node.
  void tangentStep(const StateSnapshot& baseOld, const StateSnapshot& baseNew,
                   const ScalarField& uNext, const ScalarField& xiOld,
                   const ScalarField& rhoOld, const ScalarField& hNext,
                   const ScalarField& kNext, ScalarField& xiNew, ScalarField& etaNew,
                   ScalarField& rhoNew) const;

  // Transposed tangent step: consumes the adjoint state (lamPhi, lamSigma)
  // at the new node, emits the multipliers (p, q, r) of this step and the
  // adjoint state at the old node (before adding tracking sources).
  void adjointStep(const StateSnapshot& baseOld, const StateSnapshot& baseNew,
                   const ScalarField& uNext, const ScalarField& lamPhiNew,
                   const ScalarField& lamSigmaNew, ScalarField& p, ScalarField& q,
                   ScalarField& r, ScalarField& lamPhiOld, ScalarField& lamSigmaOld) const;

  const GridSpec& grid() const;
  double dt() const;
  const ModelParams& params() const;
  const KernelTable& kernel() const;
  const PotentialSpec& potential() const;
  const StepOptions& options() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// mu(0) from the elliptic problem -tau m lap(mu) + (1 + tau P(phi0)) mu = f,
// f = tau P(phi0)(sigma0 + chi(1-phi0)) - tau h(phi0) u0 + A F'(phi0)
//     + B a phi0 - B J*phi0 - chi sigma0,  homogeneous Neumann.
ScalarField initialMu(const ScalarField& phi0, const ScalarField& sigma0,
                      const ScalarField& u0, const ModelParams& params,
                      const KernelTable& kernel, const PotentialSpec& potential);

// Ginzburg-Landau energy E = int A F(phi) + (B/2) a phi^2 - (B/2)(J*phi)phi
//                            + sigma^2/2 + chi sigma (1-phi).
double energy(const StateSnapshot& s, const ModelParams& params, const KernelTable& kernel,
              const PotentialSpec& potential);

// Defect of the discrete energy identity between two consecutive snapshots:
//   (E^{n+1}-E^n)/dt + tau||dphi/dt||^2 + m|mu|_{H1}^2 + n|sigma+chi(1-phi)|_{H1}^2
//   + ||sqrt(P(phi^n)) (sigma+chi(1-phi)-mu)^{n+1}||^2
//   + (h(phi^n) u^{n+1}, mu^{n+1}) - (v^{n+1}, (sigma+chi(1-phi))^{n+1}).
// First-order small for the scheme's own trajectory.
double energyIdentityResidual(const StateSnapshot& old, const StateSnapshot& nw,
                              const ScalarField& uNext, const ScalarField& vNext, double dt,
                              const ModelParams& params, const KernelTable& kernel,
                              const PotentialSpec& potential);

Trajectory simulate(const ScalarField& phi0, const ScalarField& sigma0,
                    const ControlPair& controls, const TimeGrid& time,
                    const ModelParams& params, const KernelTable& kernel,
                    const PotentialSpec& potential, StepOptions opts = {},
                    const TimeField* forcePhi = nullptr, const TimeField* forceSigma = nullptr);

SeparationReport separationReport(const Trajectory& traj, const PotentialSpec& potential);

}  // namespace nloc
