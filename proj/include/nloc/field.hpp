// Cell-centered scalar fields on uniform rectangular grids, plus the
// time grid. Everything downstream (kernels, solvers, adjoints) works on
// these value types.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nloc {

// Base error for the library. Validation errors carry the label of the
// violated model assumption (A1..A8, B1..B5, C1..C4) so config rejections
// are traceable.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : Error {
  std::string label;  // e.g. "A1", "B2", "C3", or a structural tag
  ValidationError(std::string lbl, const std::string& msg)
      : Error("[" + lbl + "] " + msg), label(std::move(lbl)) {}
};

struct SolverError : Error {
  using Error::Error;
};

// Thrown when a singular potential is evaluated outside (-l, l), i.e. the
// separation property failed upstream.
struct SeparationError : SolverError {
  using SolverError::SolverError;
};

// Uniform tensor-product grid on a rectangle, d in {1, 2}. 1D grids are
// stored as nx x 1 with unit transverse spacing, so cell volume and all
// quadratures follow one code path.
struct GridSpec {
  int dim = 0;
  std::array<double, 2> extent{0.0, 1.0};
  std::array<int, 2> cells{0, 1};
  std::array<double, 2> spacing{0.0, 1.0};

  static GridSpec line(double length, int n);
  static GridSpec rect(double lx, double ly, int nx, int ny);

  int nx() const { return cells[0]; }
  int ny() const { return cells[1]; }
  std::size_t totalCells() const {
    return static_cast<std::size_t>(cells[0]) * static_cast<std::size_t>(cells[1]);
  }
  double cellVolume() const { return spacing[0] * spacing[1]; }
  // cell centers
  double x(int i) const { return (i + 0.5) * spacing[0]; }
  double y(int j) const { return dim == 2 ? (j + 0.5) * spacing[1] : 0.0; }

  bool sameAs(const GridSpec& o) const {
    return dim == o.dim && cells == o.cells && extent == o.extent;
  }
};

struct TimeGrid {
  double horizon = 0.0;
  int steps = 0;

  TimeGrid() = default;
  TimeGrid(double T, int n) : horizon(T), steps(n) {
    if (!(T > 0.0)) throw ValidationError("time", "horizon T must be > 0");
    if (n < 1) throw ValidationError("time", "steps must be >= 1");
  }
  double dt() const { return horizon / steps; }
  int nodes() const { return steps + 1; }
  double t(int n) const { return n * dt(); }
};

// One real value per cell, row-major with x fastest: index = iy*nx + ix.
struct ScalarField {
  GridSpec grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0)
      : grid(g), v(g.totalCells(), fill) {}

  std::size_t size() const { return v.size(); }
  double& operator[](std::size_t k) { return v[k]; }
  double operator[](std::size_t k) const { return v[k]; }
  double& at(int ix, int iy) { return v[static_cast<std::size_t>(iy) * grid.nx() + ix]; }
  double at(int ix, int iy) const { return v[static_cast<std::size_t>(iy) * grid.nx() + ix]; }

  bool allFinite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

inline void requireSameGrid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!a.grid.sameAs(b.grid))
    throw Error(std::string(what) + ": fields live on different grids");
}

}  // namespace nloc
