// Non-local convolution operator (J * f)(x) = int_Omega J(x-y) f(y) dy on
// the cell-centered grid, with the derived quantities
//   a(x) = (J*1)(x),  a* = sup_x int |J(x-y)| dy,  b = sup_x int |grad J| dy.
//
// Weights are kernel samples on the cell-difference lattice scaled by the
// cell volume (midpoint quadrature), so the operator matrix W(x-y) is
// symmetric for even kernels and the discrete operator is self-adjoint
// w.r.t. inner(). The integral runs over Omega only: the fast path is a
// zero-padded *linear* FFT convolution, never a periodic wrap.
#pragma once

#include "nloc/field.hpp"
#include "nloc/potential.hpp"

#include <memory>
#include <string>
#include <vector>

namespace nloc {

enum class KernelFamily { Gaussian, Constant, TruncatedNewton, Mollifier };

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  // gaussian: width; truncated_newton: singularity clamp delta;
  // mollifier: support radius epsilon; constant: amplitude.
  double param = 0.1;

  static KernelSpec gaussian(double width) { return {KernelFamily::Gaussian, width}; }
  static KernelSpec constant(double amplitude = 1.0) { return {KernelFamily::Constant, amplitude}; }
  static KernelSpec truncatedNewton(double delta) { return {KernelFamily::TruncatedNewton, delta}; }
  static KernelSpec mollifier(double eps) { return {KernelFamily::Mollifier, eps}; }

  // pointwise kernel value J(z), z = (zx, zy); even by construction
  double value(double zx, double zy, int dim) const;
  std::string name() const;
  // Definition-4 style admissibility metadata (radially non-increasing
  // families); recorded, not re-verified symbolically.
  bool admissibleMetadata() const { return family != KernelFamily::Constant; }
};

struct CoercivityReport {
  double c0 = 0.0;       // min_s A F''(s) + B min_x a(x)
  double chiSq = 0.0;
  bool passes = false;   // c0 > chi^2
  double minFpp = 0.0;
  double minA = 0.0;     // min_x a(x)
  double sLo = 0.0, sHi = 0.0;
  int samples = 0;
};

// Immutable after construction; convolve() is pure and thread-safe
// (per-call FFT buffers, plans created once under a planning lock).
class KernelTable {
 public:
  KernelTable(const KernelSpec& spec, const GridSpec& grid);
  ~KernelTable();
  KernelTable(const KernelTable&) = delete;
  KernelTable& operator=(const KernelTable&) = delete;

  const KernelSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return grid_; }
  const ScalarField& aField() const { return aField_; }
  double aStar() const { return aStar_; }
  double bConst() const { return bConst_; }

  // weight at lattice lag (dx, dy), dx in [-(nx-1), nx-1]
  double weight(int dx, int dy) const;

  // fast zero-padded FFT path
  ScalarField convolve(const ScalarField& f) const;
  // direct O(n^2) summation (reference/oracle); omp optionally parallel
  ScalarField convolveDirect(const ScalarField& f, bool parallel = false) const;

 private:
  struct Fft;
  KernelSpec spec_;
  GridSpec grid_;
  std::vector<double> weights_;      // (2nx-1) x (2ny-1), lag-indexed
  ScalarField aField_;
  double aStar_ = 0.0;
  double bConst_ = 0.0;
  std::unique_ptr<Fft> fft_;
};

std::unique_ptr<KernelTable> buildKernelTable(const KernelSpec& spec, const GridSpec& grid);

// A4/B2 audit: c0 = min_s A F''(s) + B min_x a(x) over a documented s-sample
// of the potential domain, compared against chi^2.
CoercivityReport checkCoercivity(const KernelTable& table, const PotentialSpec& pot,
                                 double A, double B, double chi);

}  // namespace nloc
