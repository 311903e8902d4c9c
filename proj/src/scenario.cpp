#include "nloc/scenario.hpp"
#include "nloc/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace nloc {

ScalarField FieldPreset::realize(const GridSpec& g) const {
  if (kind == Kind::File) return importFieldRaw(path, g);
  ScalarField f(g);
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      const double x = g.x(ix), y = g.y(iy);
      double val = base;
      switch (kind) {
        case Kind::Constant: break;
        case Kind::Cosine: {
          double c = std::cos(M_PI * x / g.extent[0]);
          if (g.dim == 2) c *= std::cos(M_PI * y / g.extent[1]);
          val += amplitude * c;
          break;
        }
        case Kind::Blob: {
          const double dx = x - center[0];
          const double dy = g.dim == 2 ? y - center[1] : 0.0;
          val += amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
          break;
        }
        case Kind::File: break;
      }
      f.at(ix, iy) = val;
    }
  }
  return f;
}

ControlBounds Scenario::bounds() const {
  ControlBounds b;
  b.uMin = ScalarField(grid, uMin);
  b.uMax = ScalarField(grid, uMax);
  b.vMin = ScalarField(grid, vMin);
  b.vMax = ScalarField(grid, vMax);
  b.M = M;
  return b;
}

ControlPair Scenario::initialControls() const {
  ControlPair c;
  c.u = TimeField(time.nodes(), grid);
  c.v = TimeField(time.nodes(), grid);
  for (ScalarField& node : c.u.nodes) std::fill(node.v.begin(), node.v.end(), uInit);
  for (ScalarField& node : c.v.nodes) std::fill(node.v.begin(), node.v.end(), vInit);
  return c;
}

TargetData Scenario::targets() const {
  TargetData t;
  t.phiOmega = targetPhiFinal.realize(grid);
  t.sigmaOmega = targetSigmaFinal.realize(grid);
  const ScalarField phiPath = targetPhiPath.realize(grid);
  const ScalarField sigmaPath = targetSigmaPath.realize(grid);
  t.phiQ = TimeField(time.nodes(), grid);
  t.sigmaQ = TimeField(time.nodes(), grid);
  for (int n = 0; n < time.nodes(); ++n) {
    t.phiQ[n] = phiPath;
    t.sigmaQ[n] = sigmaPath;
  }
  return t;
}

ScenarioValidationError::ScenarioValidationError(std::vector<std::string> v)
    : ValidationError("validate", [&v] {
        std::string msg = "scenario rejected:";
        for (const std::string& s : v) msg += "\n  " + s;
        return msg;
      }()),
      violations(std::move(v)) {}

namespace {

struct ConfigMap {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> kv;
  std::set<std::string> used;
  std::string path;

  bool has(const std::string& key) const { return kv.count(key) != 0; }

  const Entry& fetch(const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ValidationError("config", path + ": missing required key '" + key + "'");
    used.insert(key);
    return it->second;
  }

  double number(const std::string& raw, const std::string& key, int line) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(raw, &pos);
    } catch (...) {
      pos = 0;
    }
    if (pos != raw.size())
      throw ValidationError("config", path + ":" + std::to_string(line) + ": key '" + key +
                                          "' is not a number: '" + raw + "'");
    return v;
  }

  double getD(const std::string& key) {
    const Entry& e = fetch(key);
    return number(e.value, key, e.line);
  }
  double getD(const std::string& key, double dflt) { return has(key) ? getD(key) : dflt; }
  int getI(const std::string& key) {
    const double v = getD(key);
    if (v != std::floor(v))
      throw ValidationError("config", path + ": key '" + key + "' must be an integer");
    return static_cast<int>(v);
  }
  int getI(const std::string& key, int dflt) { return has(key) ? getI(key) : dflt; }
  std::string getS(const std::string& key) { return fetch(key).value; }
  std::string getS(const std::string& key, const std::string& dflt) {
    return has(key) ? getS(key) : dflt;
  }
  std::array<double, 2> getVec2(const std::string& key, std::array<double, 2> dflt) {
    if (!has(key)) return dflt;
    const Entry& e = fetch(key);
    std::istringstream ss(e.value);
    std::array<double, 2> out = dflt;
    std::string tok;
    int i = 0;
    while (ss >> tok && i < 2) out[i++] = number(tok, key, e.line);
    if (i == 1) out[1] = out[0];
    return out;
  }

  void checkAllUsed() const {
    std::string unknown;
    for (const auto& [key, entry] : kv)
      if (!used.count(key))
        unknown += "\n  line " + std::to_string(entry.line) + ": " + key;
    if (!unknown.empty())
      throw ValidationError("config", path + ": unknown key(s):" + unknown);
  }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

ConfigMap parseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open scenario file '" + path + "'");
  ConfigMap cfg;
  cfg.path = path;
  std::string line, section;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError("config", path + ":" + std::to_string(lineNo) +
                                            ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config", path + ":" + std::to_string(lineNo) +
                                          ": expected 'key = value', got '" + line + "'");
    const std::string key =
        (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (cfg.kv.count(key))
      throw ValidationError("config", path + ":" + std::to_string(lineNo) +
                                          ": duplicate key '" + key + "'");
    cfg.kv[key] = {value, lineNo};
  }
  return cfg;
}

FieldPreset readPreset(ConfigMap& cfg, const std::string& section, const FieldPreset& dflt) {
  FieldPreset p = dflt;
  const std::string kindKey = section + ".preset";
  if (!cfg.has(kindKey)) return p;
  const std::string kind = cfg.getS(kindKey);
  if (kind == "constant") p.kind = FieldPreset::Kind::Constant;
  else if (kind == "cosine") p.kind = FieldPreset::Kind::Cosine;
  else if (kind == "blob") p.kind = FieldPreset::Kind::Blob;
  else if (kind == "file") p.kind = FieldPreset::Kind::File;
  else
    throw ValidationError("config", "unknown field preset '" + kind + "' in [" + section + "]");
  p.base = cfg.getD(section + ".base", p.base);
  p.amplitude = cfg.getD(section + ".amplitude", p.amplitude);
  p.width = cfg.getD(section + ".width", p.width);
  p.center = cfg.getVec2(section + ".center", p.center);
  if (p.kind == FieldPreset::Kind::File) p.path = cfg.getS(section + ".path");
  return p;
}

ReactionProfile readProfile(ConfigMap& cfg, const std::string& section,
                            const ReactionProfile& dflt) {
  if (!cfg.has(section + ".profile")) return dflt;
  const std::string kind = cfg.getS(section + ".profile");
  if (kind == "constant") return ReactionProfile::constant(cfg.getD(section + ".value"));
  if (kind == "tanh_ramp")
    return ReactionProfile::tanhRamp(cfg.getD(section + ".lo"), cfg.getD(section + ".hi"),
                                     cfg.getD(section + ".scale", 1.0));
  throw ValidationError("config", "unknown profile '" + kind + "' in [" + section + "]");
}

}  // namespace

Scenario loadScenario(const std::string& path) {
  ConfigMap cfg = parseFile(path);
  Scenario s;
  std::vector<std::string> violations;
  auto guard = [&violations](auto&& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      violations.push_back(e.what());
    }
  };

  guard([&] {
    const int dim = cfg.getI("grid.dim");
    const auto extent = cfg.getVec2("grid.extent", {1.0, 1.0});
    const auto cells = cfg.getVec2("grid.cells", {32, 32});
    if (dim == 1)
      s.grid = GridSpec::line(extent[0], static_cast<int>(cells[0]));
    else if (dim == 2)
      s.grid = GridSpec::rect(extent[0], extent[1], static_cast<int>(cells[0]),
                              static_cast<int>(cells[1]));
    else
      throw ValidationError("grid", "dim must be 1 or 2");
  });
  guard([&] { s.time = TimeGrid(cfg.getD("time.horizon"), cfg.getI("time.steps")); });

  guard([&] {
    s.params.A = cfg.getD("params.A", 1.0);
    s.params.B = cfg.getD("params.B", 1.0);
    s.params.tau = cfg.getD("params.tau", 0.1);
    s.params.chi = cfg.getD("params.chi", 0.0);
    s.params.m = cfg.getD("params.m", 1.0);
    s.params.n = cfg.getD("params.n", 1.0);
    s.params.P = readProfile(cfg, "params.proliferation", ReactionProfile::constant(1.0));
    s.params.h = readProfile(cfg, "params.distribution", ReactionProfile::constant(0.0));
    s.params.validate();
  });

  guard([&] {
    const std::string family = cfg.getS("kernel.family", "gaussian");
    const double param = cfg.getD("kernel.param", 0.1 * std::min(s.grid.extent[0],
                                                                 s.grid.dim == 2 ? s.grid.extent[1]
                                                                                 : s.grid.extent[0]));
    if (family == "gaussian") s.kernel = KernelSpec::gaussian(param);
    else if (family == "constant") s.kernel = KernelSpec::constant(param);
    else if (family == "truncated_newton") s.kernel = KernelSpec::truncatedNewton(param);
    else if (family == "mollifier") s.kernel = KernelSpec::mollifier(param);
    else throw ValidationError("config", "unknown kernel family '" + family + "'");
    if (!(param > 0.0)) throw ValidationError("A2", "kernel parameter must be > 0");
  });

  guard([&] {
    const std::string kind = cfg.getS("potential.kind", "regular_quartic");
    if (kind == "regular_quartic") {
      s.potential = PotentialSpec::regularQuartic();
    } else if (kind == "logarithmic") {
      s.potential = PotentialSpec::logarithmic(cfg.getD("potential.theta", 0.3),
                                               cfg.getD("potential.theta0", 0.6));
    } else {
      throw ValidationError("config", "unknown potential kind '" + kind + "'");
    }
  });

  s.initialPhi = readPreset(cfg, "initial.phi", FieldPreset{});
  s.initialSigma = readPreset(cfg, "initial.sigma", FieldPreset{});
  s.targetPhiFinal = readPreset(cfg, "targets.phi_final", FieldPreset{});
  s.targetSigmaFinal = readPreset(cfg, "targets.sigma_final", FieldPreset{});
  s.targetPhiPath = readPreset(cfg, "targets.phi_path", FieldPreset{});
  s.targetSigmaPath = readPreset(cfg, "targets.sigma_path", FieldPreset{});

  guard([&] {
    s.weights.alphaOmega = cfg.getD("weights.alpha_omega", 1.0);
    s.weights.alphaQ = cfg.getD("weights.alpha_q", 0.0);
    s.weights.betaOmega = cfg.getD("weights.beta_omega", 0.0);
    s.weights.betaQ = cfg.getD("weights.beta_q", 0.0);
    s.weights.alphaU = cfg.getD("weights.alpha_u", 1e-2);
    s.weights.betaV = cfg.getD("weights.beta_v", 1e-2);
    s.weights.validate();
  });

  guard([&] {
    s.uMin = cfg.getD("controls.u_min", 0.0);
    s.uMax = cfg.getD("controls.u_max", 1.0);
    s.vMin = cfg.getD("controls.v_min", -1.0);
    s.vMax = cfg.getD("controls.v_max", 1.0);
    s.M = cfg.getD("controls.M", 10.0);
    s.uInit = cfg.getD("controls.u_init", 0.0);
    s.vInit = cfg.getD("controls.v_init", 0.0);
    if (s.uMin < 0.0) throw ValidationError("C3", "u_min must be >= 0");
    if (s.uMin > s.uMax) throw ValidationError("C3", "u_min must be <= u_max");
    if (s.vMin > s.vMax) throw ValidationError("C3", "v_min must be <= v_max");
    if (!(s.M > 0.0)) throw ValidationError("C3", "M must be > 0");
  });

  guard([&] {
    s.optimizer.maxIters = cfg.getI("optimizer.max_iters", 100);
    s.optimizer.armijoInitStep = cfg.getD("optimizer.armijo_init_step", 1.0);
    s.optimizer.armijoShrink = cfg.getD("optimizer.armijo_shrink", 0.5);
    s.optimizer.armijoC = cfg.getD("optimizer.armijo_c", 1e-4);
    s.optimizer.stationarityTol = cfg.getD("optimizer.stationarity_tol", 1e-6);
    s.optimizer.dykstraMaxSweeps = cfg.getI("optimizer.dykstra_max_sweeps", 500);
    s.optimizer.dykstraTol = cfg.getD("optimizer.dykstra_tol", 1e-12);
    s.optimizer.validate();
  });

  s.seed = static_cast<std::uint64_t>(cfg.getD("seed", 0.0));

  cfg.checkAllUsed();
  if (!violations.empty()) throw ScenarioValidationError(std::move(violations));
  return s;
}

std::vector<std::string> auditScenario(const Scenario& s) {
  std::vector<std::string> violations;
  std::unique_ptr<KernelTable> table;
  try {
    table = buildKernelTable(s.kernel, s.grid);
  } catch (const ValidationError& e) {
    violations.push_back(e.what());
  }
  if (table) {
    const CoercivityReport rep =
        checkCoercivity(*table, s.potential, s.params.A, s.params.B, s.params.chi);
    if (!rep.passes)
      violations.push_back("[B2] coercivity failed: c0 = " + std::to_string(rep.c0) +
                           " (A min F'' = " + std::to_string(s.params.A * rep.minFpp) +
                           ", B min a = " + std::to_string(s.params.B * rep.minA) +
                           ") must exceed chi^2 = " + std::to_string(rep.chiSq));
  }
  try {
    const ScalarField phi0 = s.phi0();
    const double l = s.potential.domainHalfWidth();
    if (!(maxAbs(phi0) < l))
      violations.push_back("[B5] phi0 must be separated: ||phi0||_inf = " +
                           std::to_string(maxAbs(phi0)) + " >= " + std::to_string(l));
    if (!phi0.allFinite()) violations.push_back("[B5] phi0 contains non-finite values");
  } catch (const Error& e) {
    violations.push_back(std::string("[B5] cannot realize phi0: ") + e.what());
  }
  try {
    if (!s.sigma0().allFinite())
      violations.push_back("[B5] sigma0 contains non-finite values");
  } catch (const Error& e) {
    violations.push_back(std::string("[B5] cannot realize sigma0: ") + e.what());
  }
  return violations;
}

}  // namespace nloc
