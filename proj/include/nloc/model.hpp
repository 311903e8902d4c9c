// Physical coefficients of the tumour-growth system and the bounded C^1
// reaction/source profiles P (proliferation) and h (therapy distribution).
#pragma once

#include "nloc/field.hpp"

#include <algorithm>
#include <cmath>

namespace nloc {

// Bounded scalar profile with bounded Lipschitz derivative. tanh_ramp
// interpolates lo -> hi over the given scale; constant uses lo only.
struct ReactionProfile {
  enum class Kind { Constant, TanhRamp };
  Kind kind = Kind::Constant;
  double lo = 1.0, hi = 1.0, scale = 1.0;

  static ReactionProfile constant(double value) { return {Kind::Constant, value, value, 1.0}; }
  static ReactionProfile tanhRamp(double lo, double hi, double scale) {
    if (!(scale > 0.0)) throw ValidationError("profile", "tanh_ramp scale must be > 0");
    return {Kind::TanhRamp, lo, hi, scale};
  }

  double operator()(double s) const {
    if (kind == Kind::Constant) return lo;
    return lo + (hi - lo) * 0.5 * (1.0 + std::tanh(s / scale));
  }
  double derivative(double s) const {
    if (kind == Kind::Constant) return 0.0;
    const double t = std::tanh(s / scale);
    return (hi - lo) * 0.5 * (1.0 - t * t) / scale;
  }
  double infimum() const { return std::min(lo, hi); }
  double supremum() const { return std::max(lo, hi); }
  double derivativeBound() const {
    return kind == Kind::Constant ? 0.0 : std::fabs(hi - lo) * 0.5 / scale;
  }
};

struct ModelParams {
  double A = 1.0;      // potential weight
  double B = 1.0;      // non-local interaction weight
  double tau = 0.1;    // viscosity
  double chi = 0.0;    // chemotaxis
  double m = 1.0;      // phi mobility (constant)
  double n = 1.0;      // sigma mobility (constant)
  ReactionProfile P = ReactionProfile::constant(1.0);   // proliferation
  ReactionProfile h = ReactionProfile::constant(0.0);   // therapy distribution

  // A1 + constant-mobility A6 bounds + A5/B3 strict positivity of P
  void validate() const {
    if (!(A > 0.0)) throw ValidationError("A1", "A must be > 0");
    if (!(B > 0.0)) throw ValidationError("A1", "B must be > 0");
    if (!(tau > 0.0)) throw ValidationError("A1", "tau must be > 0");
    if (!(chi >= 0.0)) throw ValidationError("A1", "chi must be >= 0");
    if (!(m > 0.0)) throw ValidationError("A6", "mobility m must be > 0");
    if (!(n > 0.0)) throw ValidationError("A6", "mobility n must be > 0");
    if (!(P.infimum() > 0.0))
      throw ValidationError("A5", "proliferation profile must satisfy P(s) >= P0 > 0");
  }
};

}  // namespace nloc
