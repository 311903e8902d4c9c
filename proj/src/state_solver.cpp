#include "nloc/state_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>

namespace nloc {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// largest cell count still handled by the direct sparse factorization
constexpr std::size_t kDirectSolveCells = 64 * 64;

Eigen::VectorXd toVec(const ScalarField& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.v.data(), static_cast<Eigen::Index>(f.size()));
}

ScalarField toField(const GridSpec& g, const Eigen::VectorXd& v, Eigen::Index offset) {
  ScalarField f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f.v[k] = v[offset + static_cast<Eigen::Index>(k)];
  return f;
}

// 3-point/5-point Neumann Laplacian as a sparse matrix; same stencil as
// laplacianNeumann (mirrored ghosts drop the missing-neighbor terms).
SpMat buildLaplacian(const GridSpec& g) {
  const int nx = g.nx(), ny = g.ny();
  const double ihx2 = 1.0 / (g.spacing[0] * g.spacing[0]);
  const double ihy2 = 1.0 / (g.spacing[1] * g.spacing[1]);
  std::vector<Triplet> t;
  t.reserve(g.totalCells() * 5);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int k = iy * nx + ix;
      double diag = 0.0;
      if (ix > 0) { t.emplace_back(k, k - 1, ihx2); diag -= ihx2; }
      if (ix < nx - 1) { t.emplace_back(k, k + 1, ihx2); diag -= ihx2; }
      if (ny > 1) {
        if (iy > 0) { t.emplace_back(k, k - nx, ihy2); diag -= ihy2; }
        if (iy < ny - 1) { t.emplace_back(k, k + nx, ihy2); diag -= ihy2; }
      }
      t.emplace_back(k, k, diag);
    }
  }
  SpMat L(static_cast<Eigen::Index>(g.totalCells()), static_cast<Eigen::Index>(g.totalCells()));
  L.setFromTriplets(t.begin(), t.end());
  L.makeCompressed();
  return L;
}

}  // namespace

struct StepSystem::Impl {
  GridSpec grid;
  double dt;
  ModelParams params;
  const KernelTable& kernel;
  PotentialSpec pot;
  StepOptions opts;
  SpMat L;
  std::size_t n;

  Impl(const GridSpec& g, double dtIn, const ModelParams& p, const KernelTable& k,
       const PotentialSpec& potIn, StepOptions o)
      : grid(g), dt(dtIn), params(p), kernel(k), pot(potIn), opts(o),
        L(buildLaplacian(g)), n(g.totalCells()) {
    if (!(dt > 0.0)) throw ValidationError("time", "dt must be > 0");
    if (!k.grid().sameAs(g)) throw Error("StepSystem: kernel table grid mismatch");
    params.validate();
  }

  // convex-part derivative pair, honoring the Yosida fallback mode
  double f1p(double s) const {
    if (opts.convexPart == StepOptions::ConvexPart::Direct) return pot.f1Prime(s);
    return yosidaPrime(pot, YosidaParams(opts.yosidaLambda), s);
  }
  double f1pp(double s) const {
    if (opts.convexPart == StepOptions::ConvexPart::Direct) return pot.f1PrimePrime(s);
    const double lam = opts.yosidaLambda;
    const double resolvent = s - lam * yosidaPrime(pot, YosidaParams(lam), s);
    const double fpp = pot.f1PrimePrime(resolvent);
    return fpp / (1.0 + lam * fpp);
  }

  // Jacobian of the step residual w.r.t. the new unknowns (phi, mu, sigma),
  // evaluated with P, h frozen at phiOld and F1'' at phiNew.
  SpMat assembleJacobian(const ScalarField& phiOld, const ScalarField& phiNew) const {
    const auto& a = kernel.aField();
    const double A = params.A, B = params.B, chi = params.chi;
    const double m = params.m, nn = params.n, tau = params.tau;
    const Eigen::Index N = static_cast<Eigen::Index>(n);
    std::vector<Triplet> t;
    t.reserve(n * 12 + 2 * L.nonZeros());
    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::Index i = static_cast<Eigen::Index>(k);
      const double Pn = params.P(phiOld[k]);
      t.emplace_back(i, i, 1.0 + dt * chi * Pn);             // R1/phi
      t.emplace_back(i, N + i, dt * Pn);                     // R1/mu (reaction)
      t.emplace_back(i, 2 * N + i, -dt * Pn);                // R1/sigma
      t.emplace_back(N + i, i, -tau / dt - A * f1pp(phiNew[k]) - B * a[k]);  // R2/phi
      t.emplace_back(N + i, N + i, 1.0);                     // R2/mu
      t.emplace_back(N + i, 2 * N + i, chi);                 // R2/sigma
      t.emplace_back(2 * N + i, i, -dt * chi * Pn);          // R3/phi (reaction)
      t.emplace_back(2 * N + i, N + i, -dt * Pn);            // R3/mu
      t.emplace_back(2 * N + i, 2 * N + i, 1.0 + dt * Pn);   // R3/sigma
    }
    for (int row = 0; row < L.outerSize(); ++row) {
      for (SpMat::InnerIterator it(L, row); it; ++it) {
        t.emplace_back(it.row(), N + it.col(), -dt * m * it.value());          // R1: -dt m lap(mu)
        t.emplace_back(2 * N + it.row(), it.col(), dt * chi * nn * it.value());  // R3: +dt chi n lap(phi)
        t.emplace_back(2 * N + it.row(), 2 * N + it.col(), -dt * nn * it.value());  // R3: -dt n lap(sigma)
      }
    }
    SpMat J(3 * N, 3 * N);
    J.setFromTriplets(t.begin(), t.end());
    J.makeCompressed();
    return J;
  }

  Eigen::VectorXd solveSparse(const SpMat& M, const Eigen::VectorXd& rhs, const char* what) const {
    if (n <= kDirectSolveCells) {
      Eigen::SparseLU<SpMat> lu;
      lu.compute(M);
      if (lu.info() != Eigen::Success)
        throw SolverError(std::string(what) + ": sparse factorization failed");
      return lu.solve(rhs);
    }
    // The three-field Jacobian mixes the -tau/dt viscosity scale with unit
    // rows; diagonally preconditioned BiCGSTAB stalls or breaks down on it,
    // so the large-grid tier uses an incomplete-LU preconditioner instead.
    Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-5);
    it.preconditioner().setFillfactor(12);
    it.setTolerance(1e-13);
    it.setMaxIterations(2000);
    it.compute(M);
    Eigen::VectorXd x = it.solve(rhs);
    if (it.info() != Eigen::Success)
      throw SolverError(std::string(what) + ": iterative solve failed (residual " +
                        std::to_string(it.error()) + ")");
    return x;
  }

  // nonlinear residual of the implicit step at the guess (phi, mu, sigma)
  void residual(const StateSnapshot& old, const ScalarField& phi, const ScalarField& mu,
                const ScalarField& sigma, const ScalarField& uNext, const ScalarField& vNext,
                const ScalarField& conv, const ScalarField* forcePhi,
                const ScalarField* forceSigma, Eigen::VectorXd& out) const {
    const double A = params.A, B = params.B, chi = params.chi;
    const double m = params.m, nn = params.n, tau = params.tau;
    const auto& a = kernel.aField();
    const ScalarField lapMu = laplacianNeumann(mu);
    const ScalarField lapPhi = laplacianNeumann(phi);
    const ScalarField lapSigma = laplacianNeumann(sigma);
    out.resize(static_cast<Eigen::Index>(3 * n));
#pragma omp parallel for schedule(static)
    for (long long kk = 0; kk < static_cast<long long>(n); ++kk) {
      const std::size_t k = static_cast<std::size_t>(kk);
      const double Pn = params.P(old.phi[k]);
      const double Hn = params.h(old.phi[k]);
      const double react = Pn * (sigma[k] + chi * (1.0 - phi[k]) - mu[k]);
      double r1 = phi[k] - old.phi[k] -
                  dt * (m * lapMu[k] + react - Hn * uNext[k]);
      if (forcePhi) r1 -= dt * (*forcePhi)[k];
      double r2 = mu[k] - (tau / dt) * (phi[k] - old.phi[k]) - A * f1p(phi[k]) -
                  A * pot.f2Prime(old.phi[k]) - B * a[k] * phi[k] + B * conv[k] +
                  chi * sigma[k];
      double r3 = sigma[k] - old.sigma[k] -
                  dt * (nn * lapSigma[k] - chi * nn * lapPhi[k] - react + vNext[k]);
      if (forceSigma) r3 -= dt * (*forceSigma)[k];
      out[kk] = r1;
      out[static_cast<Eigen::Index>(n) + kk] = r2;
      out[2 * static_cast<Eigen::Index>(n) + kk] = r3;
    }
  }
};

StepSystem::StepSystem(const GridSpec& grid, double dt, const ModelParams& params,
                       const KernelTable& kernel, const PotentialSpec& potential,
                       StepOptions opts)
    : impl_(std::make_unique<Impl>(grid, dt, params, kernel, potential, opts)) {}

StepSystem::~StepSystem() = default;

const GridSpec& StepSystem::grid() const { return impl_->grid; }
double StepSystem::dt() const { return impl_->dt; }
const ModelParams& StepSystem::params() const { return impl_->params; }
const KernelTable& StepSystem::kernel() const { return impl_->kernel; }
const PotentialSpec& StepSystem::potential() const { return impl_->pot; }
const StepOptions& StepSystem::options() const { return impl_->opts; }

StateSnapshot StepSystem::step(const StateSnapshot& old, const ScalarField& uNext,
                               const ScalarField& vNext, const ScalarField* forcePhi,
                               const ScalarField* forceSigma, int* newtonIters) const {
  Impl& im = *impl_;
  const std::size_t n = im.n;
  const double l = im.pot.domainHalfWidth();
  const bool singular =
      im.pot.kind == PotentialKind::Logarithmic && im.opts.convexPart == StepOptions::ConvexPart::Direct;
  const ScalarField conv = im.kernel.convolve(old.phi);

  ScalarField phi = old.phi, mu = old.mu, sigma = old.sigma;
  Eigen::VectorXd res;
  int iter = 0;
  for (;; ++iter) {
    im.residual(old, phi, mu, sigma, uNext, vNext, conv, forcePhi, forceSigma, res);
    const double rn = res.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(rn)) throw SolverError("step: residual not finite");
    if (rn <= im.opts.newtonTol) break;
    if (iter >= im.opts.maxNewtonIters)
      throw SolverError("step: Newton did not converge after " +
                        std::to_string(im.opts.maxNewtonIters) + " iterations (residual " +
                        std::to_string(rn) + "); consider a smaller dt");
    const SpMat J = im.assembleJacobian(old.phi, phi);
    const Eigen::VectorXd delta = im.solveSparse(J, -res, "step");

    double alpha = 1.0;
    if (singular) {
      // damp so iterates never leave (-l, l); the converged state is
      // separated strictly inside the well, so full steps resume near the solution
      const double margin = l * (1.0 - 1e-13);
      for (std::size_t k = 0; k < n; ++k) {
        const double d = delta[static_cast<Eigen::Index>(k)];
        if (d == 0.0) continue;
        const double target = d > 0.0 ? margin : -margin;
        const double lim = (target - phi[k]) / d;
        if (lim < alpha) alpha = std::max(0.0, 0.95 * lim);
      }
      if (alpha < 1e-10)
        throw SeparationError("step: iterate pinned at the potential domain boundary");
    }
    for (std::size_t k = 0; k < n; ++k) {
      phi[k] += alpha * delta[static_cast<Eigen::Index>(k)];
      mu[k] += alpha * delta[static_cast<Eigen::Index>(n + k)];
      sigma[k] += alpha * delta[static_cast<Eigen::Index>(2 * n + k)];
    }
  }
  if (newtonIters) *newtonIters = iter;
  if (im.pot.kind == PotentialKind::Logarithmic && maxAbs(phi) >= l)
    throw SeparationError("step: separation breach, ||phi||_inf >= " + std::to_string(l));
  return StateSnapshot{std::move(phi), std::move(mu), std::move(sigma)};
}

void StepSystem::tangentStep(const StateSnapshot& baseOld, const StateSnapshot& baseNew,
                             const ScalarField& uNext, const ScalarField& xiOld,
                             const ScalarField& rhoOld, const ScalarField& hNext,
                             const ScalarField& kNext, ScalarField& xiNew, ScalarField& etaNew,
                             ScalarField& rhoNew) const {
  Impl& im = *impl_;
  const std::size_t n = im.n;
  const double dt = im.dt, chi = im.params.chi, A = im.params.A, B = im.params.B,
               tau = im.params.tau;
  const ScalarField convXi = im.kernel.convolve(xiOld);

  Eigen::VectorXd rhs(static_cast<Eigen::Index>(3 * n));
#pragma omp parallel for schedule(static)
  for (long long kk = 0; kk < static_cast<long long>(n); ++kk) {
    const std::size_t k = static_cast<std::size_t>(kk);
    const double Pp = im.params.P.derivative(baseOld.phi[k]);
    const double Hp = im.params.h.derivative(baseOld.phi[k]);
    const double S = baseNew.sigma[k] + chi * (1.0 - baseNew.phi[k]) - baseNew.mu[k];
    // derivative of the step residual w.r.t. the old state and controls,
    // moved to the right-hand side
    rhs[kk] = xiOld[k] + dt * (Pp * S * xiOld[k] - Hp * uNext[k] * xiOld[k]) -
              dt * im.params.h(baseOld.phi[k]) * hNext[k];
    rhs[static_cast<Eigen::Index>(n) + kk] =
        -(tau / dt) * xiOld[k] + A * im.pot.f2PrimePrime(baseOld.phi[k]) * xiOld[k] -
        B * convXi[k];
    rhs[2 * static_cast<Eigen::Index>(n) + kk] =
        rhoOld[k] - dt * Pp * S * xiOld[k] + dt * kNext[k];
  }
  const SpMat J = im.assembleJacobian(baseOld.phi, baseNew.phi);
  const Eigen::VectorXd y = im.solveSparse(J, rhs, "tangentStep");
  xiNew = toField(im.grid, y, 0);
  etaNew = toField(im.grid, y, static_cast<Eigen::Index>(n));
  rhoNew = toField(im.grid, y, static_cast<Eigen::Index>(2 * n));
}

void StepSystem::adjointStep(const StateSnapshot& baseOld, const StateSnapshot& baseNew,
                             const ScalarField& uNext, const ScalarField& lamPhiNew,
                             const ScalarField& lamSigmaNew, ScalarField& p, ScalarField& q,
                             ScalarField& r, ScalarField& lamPhiOld,
                             ScalarField& lamSigmaOld) const {
  Impl& im = *impl_;
  const std::size_t n = im.n;
  const double dt = im.dt, chi = im.params.chi, A = im.params.A, B = im.params.B,
               tau = im.params.tau;

  Eigen::VectorXd rhs(static_cast<Eigen::Index>(3 * n));
  for (std::size_t k = 0; k < n; ++k) {
    rhs[static_cast<Eigen::Index>(k)] = lamPhiNew[k];
    rhs[static_cast<Eigen::Index>(n + k)] = 0.0;
    rhs[static_cast<Eigen::Index>(2 * n + k)] = lamSigmaNew[k];
  }
  SpMat J = im.assembleJacobian(baseOld.phi, baseNew.phi);
  SpMat Jt = SpMat(J.transpose());
  const Eigen::VectorXd w = im.solveSparse(Jt, rhs, "adjointStep");

  p = toField(im.grid, w, 0);
  const ScalarField w2 = toField(im.grid, w, static_cast<Eigen::Index>(n));
  r = toField(im.grid, w, static_cast<Eigen::Index>(2 * n));
  q = (-1.0 / dt) * w2;  // transposed mu-row: w2 = -dt q

  const ScalarField convW2 = im.kernel.convolve(w2);
  lamPhiOld = ScalarField(im.grid);
  lamSigmaOld = r;  // rho-old column is the identity
#pragma omp parallel for schedule(static)
  for (long long kk = 0; kk < static_cast<long long>(n); ++kk) {
    const std::size_t k = static_cast<std::size_t>(kk);
    const double Pp = im.params.P.derivative(baseOld.phi[k]);
    const double Hp = im.params.h.derivative(baseOld.phi[k]);
    const double S = baseNew.sigma[k] + chi * (1.0 - baseNew.phi[k]) - baseNew.mu[k];
    lamPhiOld[k] = p[k] + dt * Pp * S * (p[k] - r[k]) - dt * Hp * uNext[k] * p[k] -
                   (tau / dt) * w2[k] + A * im.pot.f2PrimePrime(baseOld.phi[k]) * w2[k] -
                   B * convW2[k];
  }
}

ScalarField initialMu(const ScalarField& phi0, const ScalarField& sigma0,
                      const ScalarField& u0, const ModelParams& params,
                      const KernelTable& kernel, const PotentialSpec& potential) {
  requireSameGrid(phi0, sigma0, "initialMu");
  params.validate();
  const double l = potential.domainHalfWidth();
  if (maxAbs(phi0) >= l)
    throw ValidationError("B5", "phi0 must be separated: ||phi0||_inf < " + std::to_string(l));
  if (!phi0.allFinite() || !sigma0.allFinite()) throw Error("initialMu: data not finite");

  const GridSpec& g = phi0.grid;
  const std::size_t n = g.totalCells();
  const double tau = params.tau, chi = params.chi;
  const ScalarField conv = kernel.convolve(phi0);
  const auto& a = kernel.aField();

  ScalarField f(g);
  for (std::size_t k = 0; k < n; ++k) {
    const double P0 = params.P(phi0[k]);
    f[k] = tau * P0 * (sigma0[k] + chi * (1.0 - phi0[k])) - tau * params.h(phi0[k]) * u0[k] +
           params.A * potential.eval(1, phi0[k]) + params.B * a[k] * phi0[k] -
           params.B * conv[k] - chi * sigma0[k];
  }

  const SpMat L = buildLaplacian(g);
  std::vector<Triplet> t;
  t.reserve(L.nonZeros() + n);
  for (int row = 0; row < L.outerSize(); ++row)
    for (SpMat::InnerIterator it(L, row); it; ++it)
      t.emplace_back(it.row(), it.col(), -tau * params.m * it.value());
  for (std::size_t k = 0; k < n; ++k)
    t.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k),
                   1.0 + tau * params.P(phi0[k]));
  SpMat M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  M.setFromTriplets(t.begin(), t.end());
  M.makeCompressed();

  Eigen::SimplicialLDLT<SpMat> chol;
  chol.compute(M);
  if (chol.info() != Eigen::Success) throw SolverError("initialMu: factorization failed");
  const Eigen::VectorXd mu = chol.solve(toVec(f));

  const double resNorm = (M * mu - toVec(f)).lpNorm<Eigen::Infinity>();
  if (!(resNorm <= 1e-10))
    throw SolverError("initialMu: residual " + std::to_string(resNorm) + " exceeds 1e-10");
  return toField(g, mu, 0);
}

namespace {
ScalarField mapPotential(const PotentialSpec& pot, const ScalarField& phi) {
  ScalarField out(phi.grid);
  for (std::size_t k = 0; k < phi.size(); ++k) out[k] = pot.eval(0, phi[k]);
  return out;
}
}  // namespace

double energy(const StateSnapshot& s, const ModelParams& params, const KernelTable& kernel,
              const PotentialSpec& potential) {
  const ScalarField conv = kernel.convolve(s.phi);
  const ScalarField aPhi = pointwiseMul(kernel.aField(), s.phi);
  double E = params.A * integral(mapPotential(potential, s.phi));
  E += 0.5 * params.B * (inner(aPhi, s.phi) - inner(conv, s.phi));
  E += 0.5 * inner(s.sigma, s.sigma);
  E += params.chi * (integral(s.sigma) - inner(s.sigma, s.phi));
  return E;
}

double energyIdentityResidual(const StateSnapshot& old, const StateSnapshot& nw,
                              const ScalarField& uNext, const ScalarField& vNext, double dt,
                              const ModelParams& params, const KernelTable& kernel,
                              const PotentialSpec& potential) {
  const double chi = params.chi;
  const std::size_t n = old.phi.size();
  const double dE = (energy(nw, params, kernel, potential) -
                     energy(old, params, kernel, potential)) / dt;

  const ScalarField dphi = (1.0 / dt) * (nw.phi - old.phi);
  ScalarField chem(nw.phi.grid);   // sigma + chi(1 - phi) at the new time
  ScalarField react(nw.phi.grid);  // sqrt(P(phi^n)) (chem - mu)
  ScalarField hu(nw.phi.grid);
  for (std::size_t k = 0; k < n; ++k) {
    chem[k] = nw.sigma[k] + chi * (1.0 - nw.phi[k]);
    react[k] = std::sqrt(params.P(old.phi[k])) * (chem[k] - nw.mu[k]);
    hu[k] = params.h(old.phi[k]) * uNext[k];
  }
  double diss = params.tau * inner(dphi, dphi);
  diss += params.m * h1SeminormSq(nw.mu);
  diss += params.n * h1SeminormSq(chem);
  diss += inner(react, react);
  const double source = -inner(hu, nw.mu) + inner(vNext, chem);
  return dE + diss - source;
}

Trajectory simulate(const ScalarField& phi0, const ScalarField& sigma0,
                    const ControlPair& controls, const TimeGrid& time,
                    const ModelParams& params, const KernelTable& kernel,
                    const PotentialSpec& potential, StepOptions opts,
                    const TimeField* forcePhi, const TimeField* forceSigma) {
  if (controls.u.nodeCount() != time.nodes() || controls.v.nodeCount() != time.nodes())
    throw Error("simulate: controls must carry one field per time node");
  Trajectory traj;
  traj.time = time;
  traj.snapshots.reserve(static_cast<std::size_t>(time.nodes()));
  traj.monitors.reserve(static_cast<std::size_t>(time.steps));

  StateSnapshot s0{phi0, initialMu(phi0, sigma0, controls.u[0], params, kernel, potential),
                   sigma0};
  traj.snapshots.push_back(std::move(s0));

  StepSystem sys(phi0.grid, time.dt(), params, kernel, potential, opts);
  for (int step = 0; step < time.steps; ++step) {
    const StateSnapshot& old = traj.snapshots.back();
    const ScalarField& uN = controls.u[step + 1];
    const ScalarField& vN = controls.v[step + 1];
    int iters = 0;
    StateSnapshot nw = sys.step(old, uN, vN, forcePhi ? &(*forcePhi)[step + 1] : nullptr,
                                forceSigma ? &(*forceSigma)[step + 1] : nullptr, &iters);

    StepMonitor mon;
    mon.time = time.t(step + 1);
    mon.newtonIters = iters;
    mon.mass = integral(nw.phi) + integral(nw.sigma);
    ScalarField budget(phi0.grid);
    for (std::size_t k = 0; k < budget.size(); ++k)
      budget[k] = -params.h(old.phi[k]) * uN[k] + vN[k];
    if (forcePhi) axpy(1.0, (*forcePhi)[step + 1], budget);
    if (forceSigma) axpy(1.0, (*forceSigma)[step + 1], budget);
    const double massOld = integral(old.phi) + integral(old.sigma);
    mon.massResidual = mon.mass - massOld - time.dt() * integral(budget);
    mon.energy = energy(nw, params, kernel, potential);
    mon.maxAbsPhi = maxAbs(nw.phi);
    traj.monitors.push_back(mon);
    traj.snapshots.push_back(std::move(nw));
  }
  return traj;
}

SeparationReport separationReport(const Trajectory& traj, const PotentialSpec& potential) {
  SeparationReport rep;
  for (const StateSnapshot& s : traj.snapshots)
    rep.maxAbsPhi = std::max(rep.maxAbsPhi, maxAbs(s.phi));
  const double l = potential.domainHalfWidth();
  rep.margin = l - rep.maxAbsPhi;  // +inf for the regular potential
  rep.breached = rep.maxAbsPhi >= l;
  return rep;
}

}  // namespace nloc
