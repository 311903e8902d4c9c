#include "nloc/kernel.hpp"
#include "nloc/ops.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace nloc {

namespace {

std::mutex& planningMutex() {
  static std::mutex m;
  return m;
}

// next size >= n with prime factors in {2,3,5,7} (fast FFTW sizes)
int nextFastSize(int n) {
  for (int s = n;; ++s) {
    int r = s;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return s;
  }
}

// mass of the unit bump exp(-1/(1-|t|^2)) on the unit ball, d = 1, 2
double bumpMass(int dim) {
  auto f1 = [](double t) { return std::exp(-1.0 / (1.0 - t * t)); };
  const int n = 20000;
  KahanSum acc;
  if (dim == 1) {
    const double h = 2.0 / n;
    for (int i = 0; i < n; ++i) {
      const double t = -1.0 + (i + 0.5) * h;
      acc.add(f1(t) * h);
    }
  } else {
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) {
      const double r = (i + 0.5) * h;
      acc.add(2.0 * M_PI * r * f1(r) * h);
    }
  }
  return acc.value();
}

}  // namespace

double KernelSpec::value(double zx, double zy, int dim) const {
  const double r2 = zx * zx + zy * zy;
  switch (family) {
    case KernelFamily::Gaussian: {
      const double w2 = param * param;
      const double norm = dim == 1 ? 1.0 / std::sqrt(2.0 * M_PI * w2)
                                   : 1.0 / (2.0 * M_PI * w2);
      return norm * std::exp(-0.5 * r2 / w2);
    }
    case KernelFamily::Constant:
      return param;
    case KernelFamily::TruncatedNewton:
      return 1.0 / std::max(std::sqrt(r2), param);
    case KernelFamily::Mollifier: {
      static const double mass1 = bumpMass(1);
      static const double mass2 = bumpMass(2);
      const double s2 = r2 / (param * param);
      if (s2 >= 1.0) return 0.0;
      const double norm = dim == 1 ? 1.0 / (mass1 * param)
                                   : 1.0 / (mass2 * param * param);
      return norm * std::exp(-1.0 / (1.0 - s2));
    }
  }
  return 0.0;
}

std::string KernelSpec::name() const {
  switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Constant: return "constant";
    case KernelFamily::TruncatedNewton: return "truncated_newton";
    case KernelFamily::Mollifier: return "mollifier";
  }
  return "?";
}

// FFT workspace: padded linear convolution via r2c/c2r transforms. Plans are
// created once (FFTW_ESTIMATE, deterministic) and executed on per-call
// buffers through the new-array interface, which is thread-safe.
struct KernelTable::Fft {
  int px = 0, py = 0;          // padded sizes
  std::size_t nreal = 0, ncplx = 0;
  fftw_plan fwd = nullptr, bwd = nullptr;
  double* planReal = nullptr;  // representative buffers the plans were made on
  fftw_complex* planCplx = nullptr;
  std::vector<double> kernelSpec;  // interleaved complex, weights transform

  Fft(int nx, int ny) {
    px = nextFastSize(2 * nx - 1);
    py = ny > 1 ? nextFastSize(2 * ny - 1) : 1;
    nreal = static_cast<std::size_t>(px) * py;
    ncplx = static_cast<std::size_t>(px / 2 + 1) * py;
    planReal = fftw_alloc_real(nreal);
    planCplx = fftw_alloc_complex(ncplx);
    std::lock_guard<std::mutex> lock(planningMutex());
    if (py > 1) {
      fwd = fftw_plan_dft_r2c_2d(py, px, planReal, planCplx, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r_2d(py, px, planCplx, planReal, FFTW_ESTIMATE);
    } else {
      fwd = fftw_plan_dft_r2c_1d(px, planReal, planCplx, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r_1d(px, planCplx, planReal, FFTW_ESTIMATE);
    }
    if (!fwd || !bwd) throw Error("kernel table: FFT plan creation failed");
  }

  ~Fft() {
    std::lock_guard<std::mutex> lock(planningMutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    fftw_free(planReal);
    fftw_free(planCplx);
  }

  // spectrum of a lag-indexed weight array ((2nx-1) x (2ny-1)), placed with
  // wraparound so that circular convolution on the padding realizes the
  // linear one
  std::vector<double> spectrumOf(const std::vector<double>& lagWeights, int nx, int ny) const {
    double* in = fftw_alloc_real(nreal);
    fftw_complex* out = fftw_alloc_complex(ncplx);
    std::fill(in, in + nreal, 0.0);
    for (int dy = -(ny - 1); dy <= ny - 1; ++dy) {
      const int wy = (dy + py) % py;
      for (int dx = -(nx - 1); dx <= nx - 1; ++dx) {
        const int wx = (dx + px) % px;
        in[static_cast<std::size_t>(wy) * px + wx] =
            lagWeights[static_cast<std::size_t>(dy + ny - 1) * (2 * nx - 1) + (dx + nx - 1)];
      }
    }
    fftw_execute_dft_r2c(fwd, in, out);
    std::vector<double> spec(2 * ncplx);
    for (std::size_t k = 0; k < ncplx; ++k) {
      spec[2 * k] = out[k][0];
      spec[2 * k + 1] = out[k][1];
    }
    fftw_free(in);
    fftw_free(out);
    return spec;
  }

  ScalarField convolveWithSpectrum(const std::vector<double>& spec, const ScalarField& f) const {
    const int nx = f.grid.nx(), ny = f.grid.ny();
    double* real = fftw_alloc_real(nreal);
    fftw_complex* cplx = fftw_alloc_complex(ncplx);
    std::fill(real, real + nreal, 0.0);
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix)
        real[static_cast<std::size_t>(iy) * px + ix] = f.at(ix, iy);
    fftw_execute_dft_r2c(fwd, real, cplx);
    const double scale = 1.0 / static_cast<double>(nreal);
    for (std::size_t k = 0; k < ncplx; ++k) {
      const double ar = cplx[k][0], ai = cplx[k][1];
      const double br = spec[2 * k], bi = spec[2 * k + 1];
      cplx[k][0] = (ar * br - ai * bi) * scale;
      cplx[k][1] = (ar * bi + ai * br) * scale;
    }
    fftw_execute_dft_c2r(bwd, cplx, real);
    ScalarField out(f.grid);
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix)
        out.at(ix, iy) = real[static_cast<std::size_t>(iy) * px + ix];
    fftw_free(real);
    fftw_free(cplx);
    return out;
  }
};

KernelTable::KernelTable(const KernelSpec& spec, const GridSpec& grid)
    : spec_(spec), grid_(grid), aField_(grid) {
  if (!(spec.param > 0.0))
    throw ValidationError("A2", "kernel parameter must be > 0 (" + spec.name() + ")");
  const double hmax = std::max(grid.spacing[0], grid.dim == 2 ? grid.spacing[1] : 0.0);
  if ((spec.family == KernelFamily::Gaussian || spec.family == KernelFamily::Mollifier) &&
      spec.param < hmax)
    throw ValidationError("A2", "kernel too narrow: " + spec.name() + " width " +
                                    std::to_string(spec.param) + " < grid spacing " +
                                    std::to_string(hmax) + "; refine the kernel or coarsen it");

  const int nx = grid.nx(), ny = grid.ny();
  const double hx = grid.spacing[0], hy = grid.spacing[1];
  const double vol = grid.cellVolume();
  const std::size_t nlag = static_cast<std::size_t>(2 * nx - 1) * (2 * ny - 1);
  weights_.resize(nlag);
  std::vector<double> gradWeights(nlag);
  for (int dy = -(ny - 1); dy <= ny - 1; ++dy) {
    for (int dx = -(nx - 1); dx <= nx - 1; ++dx) {
      const double zx = dx * hx, zy = grid.dim == 2 ? dy * hy : 0.0;
      const double j = spec.value(zx, zy, grid.dim);
      // |grad J| from central differences of J itself: one code path for all
      // families (b enters only estimates, not equations)
      const double gx = (spec.value(zx + hx, zy, grid.dim) - spec.value(zx - hx, zy, grid.dim)) / (2.0 * hx);
      double g2 = gx * gx;
      if (grid.dim == 2) {
        const double gy = (spec.value(zx, zy + hy, grid.dim) - spec.value(zx, zy - hy, grid.dim)) / (2.0 * hy);
        g2 += gy * gy;
      }
      const std::size_t k = static_cast<std::size_t>(dy + ny - 1) * (2 * nx - 1) + (dx + nx - 1);
      if (!std::isfinite(j) || !std::isfinite(g2))
        throw ValidationError("A2", "kernel sample not finite at lag (" + std::to_string(dx) +
                                        "," + std::to_string(dy) + ")");
      weights_[k] = j * vol;
      gradWeights[k] = std::sqrt(g2) * vol;
    }
  }

  fft_ = std::make_unique<Fft>(nx, ny);
  fft_->kernelSpec = fft_->spectrumOf(weights_, nx, ny);

  ScalarField ones(grid, 1.0);
  aField_ = fft_->convolveWithSpectrum(fft_->kernelSpec, ones);

  // a* and b by direct summation of the |J| and |grad J| samples, maximized
  // over x; one-time build cost, immune to transform round-off
  double aStar = 0.0, bConst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : aStar, bConst)
  for (long long jy = 0; jy < ny; ++jy) {
    for (int jx = 0; jx < nx; ++jx) {
      KahanSum absSum, gradSum;
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
          const std::size_t k =
              static_cast<std::size_t>(static_cast<int>(jy) - iy + ny - 1) * (2 * nx - 1) +
              (jx - ix + nx - 1);
          absSum.add(std::fabs(weights_[k]));
          gradSum.add(gradWeights[k]);
        }
      aStar = std::max(aStar, absSum.value());
      bConst = std::max(bConst, gradSum.value());
    }
  }
  aStar_ = aStar;
  bConst_ = bConst;
  // FFT round-off can leave a tiny negative floor on a >= 0 kernels' a(x)
  for (double& a : aField_.v)
    if (std::fabs(a) < 1e-14 * aStar_) a = std::fabs(a);
}

KernelTable::~KernelTable() = default;

double KernelTable::weight(int dx, int dy) const {
  const int nx = grid_.nx(), ny = grid_.ny();
  return weights_[static_cast<std::size_t>(dy + ny - 1) * (2 * nx - 1) + (dx + nx - 1)];
}

ScalarField KernelTable::convolve(const ScalarField& f) const {
  if (!f.grid.sameAs(grid_)) throw Error("convolve: field grid does not match kernel table");
  return fft_->convolveWithSpectrum(fft_->kernelSpec, f);
}

ScalarField KernelTable::convolveDirect(const ScalarField& f, bool parallel) const {
  if (!f.grid.sameAs(grid_)) throw Error("convolveDirect: field grid does not match kernel table");
  const int nx = grid_.nx(), ny = grid_.ny();
  ScalarField out(grid_);
#pragma omp parallel for schedule(static) if (parallel)
  for (long long jy = 0; jy < ny; ++jy) {
    for (int jx = 0; jx < nx; ++jx) {
      KahanSum acc;
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
          acc.add(weight(jx - ix, static_cast<int>(jy) - iy) * f.at(ix, iy));
      out.at(jx, static_cast<int>(jy)) = acc.value();
    }
  }
  return out;
}

std::unique_ptr<KernelTable> buildKernelTable(const KernelSpec& spec, const GridSpec& grid) {
  return std::make_unique<KernelTable>(spec, grid);
}

CoercivityReport checkCoercivity(const KernelTable& table, const PotentialSpec& pot,
                                 double A, double B, double chi) {
  CoercivityReport rep;
  const double l = pot.domainHalfWidth();
  rep.sHi = std::isfinite(l) ? l * (1.0 - 1e-9) : 1.5;
  rep.sLo = -rep.sHi;
  rep.samples = 4001;
  double minFpp = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rep.samples; ++i) {
    const double s = rep.sLo + (rep.sHi - rep.sLo) * i / (rep.samples - 1);
    minFpp = std::min(minFpp, pot.eval(2, s));
  }
  rep.minFpp = minFpp;
  rep.minA = *std::min_element(table.aField().v.begin(), table.aField().v.end());
  rep.c0 = A * minFpp + B * rep.minA;
  rep.chiSq = chi * chi;
  rep.passes = rep.c0 > rep.chiSq;
  return rep;
}

}  // namespace nloc
