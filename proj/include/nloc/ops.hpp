// Discrete operators and quadratures on cell-centered fields with
// homogeneous Neumann boundaries (mirrored ghost cells).
//
// The hot loops are OpenMP-parallel. Reductions use fixed-size blocks with
// compensated (Kahan) partial sums combined in block order, so every result
// is bit-identical regardless of thread count. nloc::serial keeps plain
// single-threaded implementations used by the tests and the benchmark.
#pragma once

#include "nloc/field.hpp"

namespace nloc {

// 3-point (1D) / 5-point (2D) Laplacian with mirrored ghost values.
// Column sums telescope to zero and the operator is self-adjoint w.r.t.
// inner().
ScalarField laplacianNeumann(const ScalarField& f);

// Midpoint quadrature of the L2(Omega) pairing.
double inner(const ScalarField& f, const ScalarField& g);

double normL2(const ScalarField& f);
double maxAbs(const ScalarField& f);

// Compensated sum of cell values times cell volume (integral of f).
double integral(const ScalarField& f);

// Discrete int |grad f|^2 via interior face differences (zero-flux faces
// contribute nothing).
double h1SeminormSq(const ScalarField& f);

namespace serial {
ScalarField laplacianNeumann(const ScalarField& f);
double inner(const ScalarField& f, const ScalarField& g);
double integral(const ScalarField& f);
double h1SeminormSq(const ScalarField& f);
}  // namespace serial

// Small field algebra used throughout the solvers.
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

void axpy(double alpha, const ScalarField& x, ScalarField& y);  // y += alpha*x
ScalarField pointwiseMul(const ScalarField& a, const ScalarField& b);

// Kahan accumulator; also used by the solvers for scalar ledgers.
struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

}  // namespace nloc
