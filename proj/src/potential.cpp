#include "nloc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace nloc {

PotentialSpec PotentialSpec::logarithmic(double theta, double theta0) {
  if (!(theta > 0.0) || !(theta < theta0))
    throw ValidationError("F_sing", "logarithmic potential requires 0 < theta < theta0");
  PotentialSpec p;
  p.kind = PotentialKind::Logarithmic;
  p.theta = theta;
  p.theta0 = theta0;
  return p;
}

namespace {
[[noreturn]] void domainViolation(double s) {
  throw SeparationError("potential derivative requested at |s| >= 1 (s = " +
                        std::to_string(s) + "): separation failed upstream");
}
}  // namespace

double PotentialSpec::f1(double s) const {
  if (kind == PotentialKind::RegularQuartic) return 0.25 * s * s * s * s;
  const double a = std::fabs(s);
  if (a > 1.0) domainViolation(s);
  // xlogx(0) = 0 by continuity, so F1 extends continuously to +-1.
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  return 0.5 * theta * (xlogx(1.0 + s) + xlogx(1.0 - s));
}

double PotentialSpec::f1Prime(double s) const {
  if (kind == PotentialKind::RegularQuartic) return s * s * s;
  if (std::fabs(s) >= 1.0) domainViolation(s);
  return 0.5 * theta * (std::log1p(s) - std::log1p(-s));
}

double PotentialSpec::f1PrimePrime(double s) const {
  if (kind == PotentialKind::RegularQuartic) return 3.0 * s * s;
  if (std::fabs(s) >= 1.0) domainViolation(s);
  return theta / ((1.0 - s) * (1.0 + s));
}

double PotentialSpec::f2Prime(double s) const {
  return kind == PotentialKind::RegularQuartic ? -s : -theta0 * s;
}

double PotentialSpec::f2PrimePrime(double) const {
  return kind == PotentialKind::RegularQuartic ? -1.0 : -theta0;
}

double PotentialSpec::eval(int order, double s) const {
  if (order < 0 || order > 3) throw Error("potential eval: order must be in 0..3");
  if (kind == PotentialKind::RegularQuartic) {
    switch (order) {
      case 0: {
        const double w = 1.0 - s * s;
        return 0.25 * w * w;
      }
      case 1: return s * s * s - s;
      case 2: return 3.0 * s * s - 1.0;
      default: return 6.0 * s;
    }
  }
  switch (order) {
    case 0: return f1(s) - 0.5 * theta0 * s * s;
    case 1: return f1Prime(s) - theta0 * s;
    case 2: return f1PrimePrime(s) - theta0;
    default: {
      if (std::fabs(s) >= 1.0) domainViolation(s);
      const double w = (1.0 - s) * (1.0 + s);
      return theta * 2.0 * s / (w * w);
    }
  }
}

double yosidaPrimeGeneric(const std::function<double(double)>& f1prime,
                          const std::function<double(double)>& f1primeprime,
                          double domainHalfWidth, double lambda, double s) {
  if (!(lambda > 0.0)) throw ValidationError("yosida", "lambda must be > 0");
  // g(r) = r + lambda*F1'(r) - s is strictly increasing on (-l, l).
  auto g = [&](double r) { return r + lambda * f1prime(r) - s; };

  double lo, hi;
  if (std::isfinite(domainHalfWidth)) {
    const double edge = domainHalfWidth * (1.0 - 1e-16);
    lo = -edge;
    hi = edge;
    // For |s| so large that the resolvent point is closer to the domain edge
    // than one ulp, the representable endpoint is the best available answer.
    if (g(lo) >= 0.0) return (s - lo) / lambda;
    if (g(hi) <= 0.0) return (s - hi) / lambda;
  } else {
    const double b = std::max(1.0, std::fabs(s)) + 1.0;
    lo = -b;
    hi = b;
  }

  double r = std::clamp(s, lo + 1e-12, hi - 1e-12);
  double gr = g(r);
  for (int it = 0; it < 100; ++it) {
    if (std::fabs(gr) <= 1e-13) break;
    if (gr > 0.0) hi = r; else lo = r;
    const double slope = 1.0 + lambda * f1primeprime(r);
    double rn = r - gr / slope;
    if (!(rn > lo) || !(rn < hi)) rn = 0.5 * (lo + hi);  // bisect when Newton leaves bracket
    if (rn == r) break;  // bracket collapsed to machine precision
    r = rn;
    gr = g(r);
  }
  if (std::fabs(gr) > 1e-13 && hi - lo > 8.0 * std::fabs(r) * 1e-16)
    throw SolverError("yosidaPrime: resolvent root solve did not reach tolerance");
  // At the root, (s - r)/lambda = F1'(r); the latter avoids the cancellation
  // of s - r for small lambda.
  return f1prime(r);
}

double yosidaPrime(const PotentialSpec& pot, const YosidaParams& yp, double s) {
  return yosidaPrimeGeneric([&pot](double r) { return pot.f1Prime(r); },
                            [&pot](double r) { return pot.f1PrimePrime(r); },
                            pot.domainHalfWidth(), yp.lambda, s);
}

namespace {
double adaptiveSimpson(const std::function<double(double)>& f, double a, double b,
                       double fa, double fm, double fb, double whole, double tol, int depth,
                       bool& converged) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    converged = false;
    return left + right + delta / 15.0;
  }
  return adaptiveSimpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, converged) +
         adaptiveSimpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, converged);
}
}  // namespace

double moreau(const PotentialSpec& pot, const YosidaParams& yp, double s) {
  const double base = pot.f1(0.0);
  if (s == 0.0) return base;
  std::function<double(double)> f = [&](double r) { return yosidaPrime(pot, yp, r); };
  const double a = 0.0, b = s;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  bool converged = true;
  const double value = base + adaptiveSimpson(f, a, b, fa, fm, fb, whole, 1e-11, 40, converged);
  if (!converged)
    throw SolverError("moreau: quadrature did not reach tolerance at s = " + std::to_string(s));
  return value;
}

}  // namespace nloc
