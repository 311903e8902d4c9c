// Shared fixtures for the tangent/adjoint/optimizer test suites.
#pragma once

#include "nloc/nloc.hpp"

#include <cmath>

namespace nloc::testing {

inline ModelParams demoParams() {
  ModelParams p;
  p.A = 1.0;
  p.B = 2.0;
  p.tau = 0.1;
  p.chi = 0.3;
  p.P = ReactionProfile::tanhRamp(0.1, 1.0, 1.0);
  p.h = ReactionProfile::tanhRamp(0.0, 1.0, 1.0);
  return p;
}

inline ScalarField smoothPhi(const GridSpec& g, double base, double amp) {
  ScalarField f(g);
  for (int iy = 0; iy < g.ny(); ++iy)
    for (int ix = 0; ix < g.nx(); ++ix) {
      double v = std::cos(M_PI * g.x(ix) / g.extent[0]);
      if (g.dim == 2) v *= std::cos(M_PI * g.y(iy) / g.extent[1]);
      f.at(ix, iy) = base + amp * v;
    }
  return f;
}

inline ControlPair zeroControls(const TimeGrid& time, const GridSpec& g) {
  ControlPair c;
  c.u = TimeField(time.nodes(), g);
  c.v = TimeField(time.nodes(), g);
  return c;
}

// compact problem bundle used by most differentiability tests
struct Fixture {
  GridSpec grid;
  TimeGrid time;
  ModelParams params;
  PotentialSpec potential;
  std::unique_ptr<KernelTable> table;
  ScalarField phi0, sigma0;
  ControlPair controls;

  static Fixture make(bool logarithmic, int cells = 24, int steps = 16, int dim = 1) {
    Fixture f;
    f.grid = dim == 1 ? GridSpec::line(1.0, cells) : GridSpec::rect(1.0, 1.0, cells, cells);
    f.time = TimeGrid(0.08, steps);
    f.params = demoParams();
    f.potential = logarithmic ? PotentialSpec::logarithmic(0.3, 0.6)
                              : PotentialSpec::regularQuartic();
    f.table = buildKernelTable(KernelSpec::gaussian(0.12), f.grid);
    f.phi0 = smoothPhi(f.grid, -0.1, 0.5);
    f.sigma0 = smoothPhi(f.grid, 0.5, 0.2);
    f.controls = zeroControls(f.time, f.grid);
    Rng rng(1234);
    f.controls.u = rng.timeField(f.time.nodes(), f.grid, 0.0, 0.6);
    f.controls.v = rng.timeField(f.time.nodes(), f.grid, -0.4, 0.4);
    return f;
  }

  Trajectory solve(const ControlPair& c) const {
    return simulate(phi0, sigma0, c, time, params, *table, potential);
  }
  Trajectory solve() const { return solve(controls); }
};

}  // namespace nloc::testing
