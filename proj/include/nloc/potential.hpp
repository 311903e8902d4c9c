// Double-well potentials: regular quartic F(s) = (1-s^2)^2/4 and singular
// logarithmic F(s) = theta/2[(1+s)log(1+s)+(1-s)log(1-s)] - theta0/2 s^2.
//
// Both carry the convex/smooth splitting F = F1 + F2 with F1'' >= 0 and F2'
// globally Lipschitz:
//   quartic:      F1 = s^4/4,                      F2 = 1/4 - s^2/2
//   logarithmic:  F1 = theta/2[(1+s)log(1+s)+...], F2 = -theta0/2 s^2
// The Moreau-Yosida branch regularizes F1 through the resolvent
// r + lambda*F1'(r) = s, giving the 1/lambda-Lipschitz F1_lambda'.
#pragma once

#include "nloc/field.hpp"

#include <functional>
#include <limits>

namespace nloc {

enum class PotentialKind { RegularQuartic, Logarithmic };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::RegularQuartic;
  double theta = 0.0;   // logarithmic only
  double theta0 = 0.0;  // logarithmic only

  static PotentialSpec regularQuartic() { return PotentialSpec{}; }
  static PotentialSpec logarithmic(double theta, double theta0);

  // half-width l of dom F1: +inf for the quartic, 1 for the logarithmic
  double domainHalfWidth() const {
    return kind == PotentialKind::Logarithmic ? 1.0 : std::numeric_limits<double>::infinity();
  }

  // F, F', F'', F''' (order 0..3). Throws SeparationError when the
  // logarithmic potential is asked for a derivative at |s| >= 1.
  double eval(int order, double s) const;

  double f1Prime(double s) const;
  double f1PrimePrime(double s) const;
  double f2Prime(double s) const;
  double f2PrimePrime(double s) const;
  double f1(double s) const;
};

struct YosidaParams {
  double lambda = 0.0;
  explicit YosidaParams(double l) : lambda(l) {
    if (!(l > 0.0)) throw ValidationError("yosida", "lambda must be > 0");
  }
};

// F1_lambda'(s) = (s - r)/lambda with r + lambda*F1'(r) = s, r in (-l, l);
// safeguarded Newton/bisection to |residual| <= 1e-13. Evaluated as F1'(r),
// which is the same value without the s - r cancellation.
double yosidaPrime(const PotentialSpec& pot, const YosidaParams& yp, double s);

// Resolvent solve against a caller-supplied convex part (test oracles use
// F1 = s^2/2, whose regularization is s/(1+lambda) in closed form).
double yosidaPrimeGeneric(const std::function<double(double)>& f1prime,
                          const std::function<double(double)>& f1primeprime,
                          double domainHalfWidth, double lambda, double s);

// Moreau envelope F1_lambda(s) = F1(0) + int_0^s F1_lambda'(r) dr by
// adaptive quadrature; satisfies F1_lambda <= F1.
double moreau(const PotentialSpec& pot, const YosidaParams& yp, double s);

}  // namespace nloc
