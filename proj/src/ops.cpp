#include "nloc/ops.hpp"

#include <cstddef>

namespace nloc {

namespace {
constexpr std::size_t kBlock = 2048;  // fixed reduction block, thread-count independent
// below these sizes the OpenMP fork-join overhead outweighs the work
constexpr std::size_t kParallelMapCutoff = 32768;
constexpr std::size_t kParallelReduceCutoff = 65536;

// Stencil for one cell; shared by the parallel and serial paths.
inline double lapCell(const ScalarField& f, int ix, int iy, int nx, int ny,
                      double ihx2, double ihy2) {
  const double c = f.at(ix, iy);
  const double w = (ix > 0) ? f.at(ix - 1, iy) : c;  // mirrored ghost
  const double e = (ix < nx - 1) ? f.at(ix + 1, iy) : c;
  double lap = (w - 2.0 * c + e) * ihx2;
  if (ny > 1) {
    const double s = (iy > 0) ? f.at(ix, iy - 1) : c;
    const double n = (iy < ny - 1) ? f.at(ix, iy + 1) : c;
    lap += (s - 2.0 * c + n) * ihy2;
  }
  return lap;
}

template <class Fn>
double blockReduce(std::size_t n, Fn cellTerm) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nb, 0.0);
  // the serial branch keeps the identical block/Kahan structure, so the
  // result never depends on which path ran
#pragma omp parallel for schedule(static) if (n >= kParallelReduceCutoff)
  for (long long b = 0; b < static_cast<long long>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
    KahanSum acc;
    for (std::size_t k = lo; k < hi; ++k) acc.add(cellTerm(k));
    partial[static_cast<std::size_t>(b)] = acc.value();
  }
  KahanSum total;
  for (double p : partial) total.add(p);
  return total.value();
}
}  // namespace

ScalarField laplacianNeumann(const ScalarField& f) {
  const GridSpec& g = f.grid;
  const int nx = g.nx(), ny = g.ny();
  const double ihx2 = 1.0 / (g.spacing[0] * g.spacing[0]);
  const double ihy2 = 1.0 / (g.spacing[1] * g.spacing[1]);
  ScalarField out(g);
#pragma omp parallel for schedule(static) if (g.totalCells() >= kParallelMapCutoff)
  for (long long iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      out.at(ix, static_cast<int>(iy)) =
          lapCell(f, ix, static_cast<int>(iy), nx, ny, ihx2, ihy2);
  return out;
}

double inner(const ScalarField& f, const ScalarField& g) {
  requireSameGrid(f, g, "inner");
  const double vol = f.grid.cellVolume();
  return vol * blockReduce(f.size(), [&](std::size_t k) { return f[k] * g[k]; });
}

double normL2(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double maxAbs(const ScalarField& f) {
  double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m) if (f.size() >= kParallelMapCutoff)
  for (long long k = 0; k < static_cast<long long>(f.size()); ++k) {
    const double a = std::fabs(f[static_cast<std::size_t>(k)]);
    if (a > m) m = a;
  }
  return m;
}

double integral(const ScalarField& f) {
  return f.grid.cellVolume() * blockReduce(f.size(), [&](std::size_t k) { return f[k]; });
}

double h1SeminormSq(const ScalarField& f) {
  const GridSpec& g = f.grid;
  const int nx = g.nx(), ny = g.ny();
  const double ihx2 = 1.0 / (g.spacing[0] * g.spacing[0]);
  const double ihy2 = 1.0 / (g.spacing[1] * g.spacing[1]);
  // per-row compensated partials combined in row order: deterministic for
  // any thread count
  std::vector<double> rowSum(static_cast<std::size_t>(ny), 0.0);
#pragma omp parallel for schedule(static) if (f.size() >= kParallelMapCutoff)
  for (long long iy = 0; iy < ny; ++iy) {
    KahanSum acc;
    const int y = static_cast<int>(iy);
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const double d = f.at(ix + 1, y) - f.at(ix, y);
      acc.add(d * d * ihx2);
    }
    if (y + 1 < ny)
      for (int ix = 0; ix < nx; ++ix) {
        const double d = f.at(ix, y + 1) - f.at(ix, y);
        acc.add(d * d * ihy2);
      }
    rowSum[static_cast<std::size_t>(iy)] = acc.value();
  }
  KahanSum total;
  for (double r : rowSum) total.add(r);
  return g.cellVolume() * total.value();
}

namespace serial {

ScalarField laplacianNeumann(const ScalarField& f) {
  const GridSpec& g = f.grid;
  const int nx = g.nx(), ny = g.ny();
  const double ihx2 = 1.0 / (g.spacing[0] * g.spacing[0]);
  const double ihy2 = 1.0 / (g.spacing[1] * g.spacing[1]);
  ScalarField out(g);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      out.at(ix, iy) = lapCell(f, ix, iy, nx, ny, ihx2, ihy2);
  return out;
}

double inner(const ScalarField& f, const ScalarField& g) {
  requireSameGrid(f, g, "inner");
  KahanSum acc;
  for (std::size_t k = 0; k < f.size(); ++k) acc.add(f[k] * g[k]);
  return f.grid.cellVolume() * acc.value();
}

double integral(const ScalarField& f) {
  KahanSum acc;
  for (double x : f.v) acc.add(x);
  return f.grid.cellVolume() * acc.value();
}

double h1SeminormSq(const ScalarField& f) {
  const GridSpec& g = f.grid;
  const int nx = g.nx(), ny = g.ny();
  const double ihx2 = 1.0 / (g.spacing[0] * g.spacing[0]);
  const double ihy2 = 1.0 / (g.spacing[1] * g.spacing[1]);
  KahanSum acc;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const double d = f.at(ix + 1, iy) - f.at(ix, iy);
      acc.add(d * d * ihx2);
    }
  for (int iy = 0; iy + 1 < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double d = f.at(ix, iy + 1) - f.at(ix, iy);
      acc.add(d * d * ihy2);
    }
  return g.cellVolume() * acc.value();
}

}  // namespace serial

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  requireSameGrid(a, b, "operator+");
  ScalarField out(a.grid);
#pragma omp parallel for schedule(static) if (a.size() >= kParallelMapCutoff)
  for (long long k = 0; k < static_cast<long long>(a.size()); ++k)
    out[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] + b[static_cast<std::size_t>(k)];
  return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  requireSameGrid(a, b, "operator-");
  ScalarField out(a.grid);
#pragma omp parallel for schedule(static) if (a.size() >= kParallelMapCutoff)
  for (long long k = 0; k < static_cast<long long>(a.size()); ++k)
    out[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
  return out;
}

ScalarField operator*(double s, const ScalarField& a) {
  ScalarField out(a.grid);
#pragma omp parallel for schedule(static) if (a.size() >= kParallelMapCutoff)
  for (long long k = 0; k < static_cast<long long>(a.size()); ++k)
    out[static_cast<std::size_t>(k)] = s * a[static_cast<std::size_t>(k)];
  return out;
}

void axpy(double alpha, const ScalarField& x, ScalarField& y) {
  requireSameGrid(x, y, "axpy");
#pragma omp parallel for schedule(static) if (x.size() >= kParallelMapCutoff)
  for (long long k = 0; k < static_cast<long long>(x.size()); ++k)
    y[static_cast<std::size_t>(k)] += alpha * x[static_cast<std::size_t>(k)];
}

ScalarField pointwiseMul(const ScalarField& a, const ScalarField& b) {
  requireSameGrid(a, b, "pointwiseMul");
  ScalarField out(a.grid);
#pragma omp parallel for schedule(static) if (a.size() >= kParallelMapCutoff)
  for (long long k = 0; k < static_cast<long long>(a.size()); ++k)
    out[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(k)];
  return out;
}

}  // namespace nloc
