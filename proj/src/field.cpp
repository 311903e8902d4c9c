#include "nloc/field.hpp"

namespace nloc {

GridSpec GridSpec::line(double length, int n) {
  if (!(length > 0.0)) throw ValidationError("grid", "extent must be > 0");
  if (n < 2) throw ValidationError("grid", "cells must be >= 2 per axis");
  GridSpec g;
  g.dim = 1;
  g.extent = {length, 1.0};
  g.cells = {n, 1};
  g.spacing = {length / n, 1.0};
  return g;
}

GridSpec GridSpec::rect(double lx, double ly, int nx, int ny) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw ValidationError("grid", "extent must be > 0");
  if (nx < 2 || ny < 2) throw ValidationError("grid", "cells must be >= 2 per axis");
  GridSpec g;
  g.dim = 2;
  g.extent = {lx, ly};
  g.cells = {nx, ny};
  g.spacing = {lx / nx, ly / ny};
  return g;
}

}  // namespace nloc
