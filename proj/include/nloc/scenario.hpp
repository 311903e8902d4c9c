// Scenario configuration: a UTF-8 key-value text format with [dotted.section]
// headers, parsed into the validated bundle that binds grid, model, kernel,
// potential, initial data, cost and admissible sets together. Violated model
// assumptions are reported by their label (A1.., B2.., C1..).
#pragma once

#include "nloc/adjoint.hpp"
#include "nloc/kernel.hpp"
#include "nloc/optimizer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nloc {

struct FieldPreset {
  enum class Kind { Constant, Cosine, Blob, File };
  Kind kind = Kind::Constant;
  double base = 0.0;
  double amplitude = 0.0;
  double width = 0.1;
  std::array<double, 2> center{0.5, 0.5};
  std::string path;

  ScalarField realize(const GridSpec& g) const;
};

struct Scenario {
  GridSpec grid;
  TimeGrid time;
  ModelParams params;
  KernelSpec kernel;
  PotentialSpec potential;
  FieldPreset initialPhi, initialSigma;
  CostWeights weights;
  FieldPreset targetPhiFinal, targetSigmaFinal, targetPhiPath, targetSigmaPath;
  double uMin = 0.0, uMax = 1.0, vMin = -1.0, vMax = 1.0, M = 10.0;
  double uInit = 0.0, vInit = 0.0;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;

  ScalarField phi0() const { return initialPhi.realize(grid); }
  ScalarField sigma0() const { return initialSigma.realize(grid); }
  ControlBounds bounds() const;
  ControlPair initialControls() const;
  TargetData targets() const;
};

// Carries every violated assumption found during load (message lines are
// "[label] explanation").
struct ScenarioValidationError : ValidationError {
  std::vector<std::string> violations;
  explicit ScenarioValidationError(std::vector<std::string> v);
};

Scenario loadScenario(const std::string& path);

// Numeric assumption audit on the realized scenario: builds the kernel
// table, checks the A4/B2 coercivity margin c0 > chi^2, B5 separation of
// phi0 and the control-set consistency. Returns violation lines, empty when
// the audit passes.
std::vector<std::string> auditScenario(const Scenario& s);

}  // namespace nloc
