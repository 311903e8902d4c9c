#include "nloc/state.hpp"

#include <cmath>

namespace nloc {

double innerQT(const TimeField& a, const TimeField& b, double dt) {
  if (a.nodeCount() != b.nodeCount()) throw Error("innerQT: node counts differ");
  KahanSum acc;
  for (int n = 1; n < a.nodeCount(); ++n) acc.add(dt * inner(a[n], b[n]));
  return acc.value();
}

double normQT(const TimeField& a, double dt) { return std::sqrt(innerQT(a, a, dt)); }

double h1TimeNormSq(const TimeField& u, double dt) {
  KahanSum acc;
  for (int n = 1; n < u.nodeCount(); ++n) {
    acc.add(dt * inner(u[n], u[n]));
    const ScalarField d = u[n] - u[n - 1];
    acc.add(inner(d, d) / dt);  // dt * ||d/dt||^2
  }
  return acc.value();
}

bool ControlPair::uInBox(const ControlBounds& b, double tol) const {
  for (const ScalarField& f : u.nodes)
    for (std::size_t k = 0; k < f.size(); ++k)
      if (f[k] < b.uMin[k] - tol || f[k] > b.uMax[k] + tol) return false;
  return true;
}

bool ControlPair::vInBox(const ControlBounds& b, double tol) const {
  for (const ScalarField& f : v.nodes)
    for (std::size_t k = 0; k < f.size(); ++k)
      if (f[k] < b.vMin[k] - tol || f[k] > b.vMax[k] + tol) return false;
  return true;
}

bool ControlPair::uInBall(const ControlBounds& b, double dt, double tol) const {
  return std::sqrt(h1TimeNormSq(u, dt)) <= b.M * (1.0 + tol) + tol;
}

}  // namespace nloc
