// Seeded splitmix64 generator for reproducible probe directions and test
// fields; kept platform-independent on purpose (no std::distribution).
#pragma once

#include "nloc/state.hpp"

#include <cstdint>

namespace nloc {

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  ScalarField field(const GridSpec& g, double lo, double hi) {
    ScalarField f(g);
    for (double& x : f.v) x = uniform(lo, hi);
    return f;
  }
  TimeField timeField(int nodes, const GridSpec& g, double lo, double hi) {
    TimeField f(nodes, g);
    for (ScalarField& node : f.nodes) node = field(g, lo, hi);
    return f;
  }
};

}  // namespace nloc
