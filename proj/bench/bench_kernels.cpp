// Benchmark: OpenMP kernels against their serial reference implementations,
// and the FFT convolution against the direct sum.
#include "nloc/kernel.hpp"
#include "nloc/ops.hpp"
#include "nloc/rng.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>

using namespace nloc;

namespace {

double timeIt(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void row(const char* name, double serialSec, double otherSec, double diff) {
  std::printf("  %-26s %10.3f us %10.3f us %7.2fx   max|diff| %.2e\n", name, serialSec * 1e6,
              otherSec * 1e6, serialSec / otherSec, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const int n = quick ? 32 : 256;
  const int convN = quick ? 24 : 48;
  const int reps = quick ? 5 : 40;

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("grid %dx%d (field kernels), %dx%d (convolution)\n\n", n, n, convN, convN);

  Rng rng(7);
  const GridSpec g = GridSpec::rect(1.0, 1.0, n, n);
  const ScalarField f = rng.field(g, -1.0, 1.0);
  const ScalarField w = rng.field(g, -1.0, 1.0);

  std::printf("  %-26s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  ScalarField lapS, lapP;
  const double tLapS = timeIt(reps, [&] { lapS = serial::laplacianNeumann(f); });
  const double tLapP = timeIt(reps, [&] { lapP = laplacianNeumann(f); });
  row("laplacian_neumann", tLapS, tLapP, maxAbs(lapS - lapP));

  double innS = 0, innP = 0;
  const double tInnS = timeIt(reps, [&] { innS = serial::inner(f, w); });
  const double tInnP = timeIt(reps, [&] { innP = inner(f, w); });
  row("inner", tInnS, tInnP, std::fabs(innS - innP));

  double h1S = 0, h1P = 0;
  const double tH1S = timeIt(reps, [&] { h1S = serial::h1SeminormSq(f); });
  const double tH1P = timeIt(reps, [&] { h1P = h1SeminormSq(f); });
  row("h1_seminorm_sq", tH1S, tH1P, std::fabs(h1S - h1P));

  const GridSpec gc = GridSpec::rect(1.0, 1.0, convN, convN);
  const ScalarField fc = rng.field(gc, -1.0, 1.0);
  const auto table = buildKernelTable(KernelSpec::gaussian(0.1), gc);

  ScalarField cS, cP, cF;
  const double tCS = timeIt(quick ? 2 : 5, [&] { cS = table->convolveDirect(fc, false); });
  const double tCP = timeIt(quick ? 2 : 5, [&] { cP = table->convolveDirect(fc, true); });
  row("convolve direct", tCS, tCP, maxAbs(cS - cP));
  const double tCF = timeIt(reps, [&] { cF = table->convolve(fc); });
  row("convolve direct vs fft", tCS, tCF, maxAbs(cS - cF));

  return 0;
}
