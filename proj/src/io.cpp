#include "nloc/io.hpp"

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>

namespace nloc {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'O', 'C', 'O', 'C', '0', '1'};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr openOrThrow(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error("io: cannot open '" + path + "'");
  return f;
}

void writeHeader(std::FILE* f, const GridSpec& g, std::uint32_t count) {
  std::uint8_t header[32] = {};
  std::memcpy(header, kMagic, 8);
  const std::uint32_t dim = static_cast<std::uint32_t>(g.dim);
  const std::uint32_t nx = static_cast<std::uint32_t>(g.nx());
  const std::uint32_t ny = static_cast<std::uint32_t>(g.ny());
  const std::uint64_t payload =
      static_cast<std::uint64_t>(count) * static_cast<std::uint64_t>(g.totalCells());
  std::memcpy(header + 8, &dim, 4);
  std::memcpy(header + 12, &nx, 4);
  std::memcpy(header + 16, &ny, 4);
  std::memcpy(header + 20, &count, 4);
  std::memcpy(header + 24, &payload, 8);
  if (std::fwrite(header, 1, 32, f) != 32) throw Error("io: header write failed");
}

std::uint32_t readHeader(std::FILE* f, const GridSpec& grid, const std::string& path) {
  std::uint8_t header[32];
  if (std::fread(header, 1, 32, f) != 32) throw Error("io: short header in '" + path + "'");
  if (std::memcmp(header, kMagic, 8) != 0)
    throw Error("io: '" + path + "' is not a NLOCOC01 raw64 file");
  std::uint32_t dim, nx, ny, count;
  std::uint64_t payload;
  std::memcpy(&dim, header + 8, 4);
  std::memcpy(&nx, header + 12, 4);
  std::memcpy(&ny, header + 16, 4);
  std::memcpy(&count, header + 20, 4);
  std::memcpy(&payload, header + 24, 8);
  if (dim != static_cast<std::uint32_t>(grid.dim) || nx != static_cast<std::uint32_t>(grid.nx()) ||
      ny != static_cast<std::uint32_t>(grid.ny()))
    throw Error("io: '" + path + "' grid (" + std::to_string(dim) + "d " + std::to_string(nx) +
                "x" + std::to_string(ny) + ") does not match the expected grid");
  if (payload != static_cast<std::uint64_t>(count) * grid.totalCells())
    throw Error("io: '" + path + "' payload length inconsistent with header");
  return count;
}

void writeValues(std::FILE* f, const std::vector<double>& v) {
  if (std::fwrite(v.data(), sizeof(double), v.size(), f) != v.size())
    throw Error("io: payload write failed");
}

void readValues(std::FILE* f, std::vector<double>& v, const std::string& path) {
  if (std::fread(v.data(), sizeof(double), v.size(), f) != v.size())
    throw Error("io: short payload in '" + path + "'");
}

void writeFieldCsvRows(std::FILE* f, const ScalarField& fld, const double* t) {
  const GridSpec& g = fld.grid;
  for (int iy = 0; iy < g.ny(); ++iy)
    for (int ix = 0; ix < g.nx(); ++ix) {
      if (t) std::fprintf(f, "%.17g,", *t);
      if (g.dim == 2)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", g.x(ix), g.y(iy), fld.at(ix, iy));
      else
        std::fprintf(f, "%.17g,%.17g\n", g.x(ix), fld.at(ix, iy));
    }
}

}  // namespace

void exportField(const ScalarField& fld, const std::string& path, ExportFormat fmt) {
  if (!fld.allFinite()) throw Error("exportField: data not finite");
  FilePtr f = openOrThrow(path, fmt == ExportFormat::Csv ? "w" : "wb");
  if (fmt == ExportFormat::Csv) {
    std::fprintf(f.get(), fld.grid.dim == 2 ? "x,y,value\n" : "x,value\n");
    writeFieldCsvRows(f.get(), fld, nullptr);
  } else {
    writeHeader(f.get(), fld.grid, 1);
    writeValues(f.get(), fld.v);
  }
}

ScalarField importFieldRaw(const std::string& path, const GridSpec& grid) {
  FilePtr f = openOrThrow(path, "rb");
  const std::uint32_t count = readHeader(f.get(), grid, path);
  if (count != 1) throw Error("io: '" + path + "' holds " + std::to_string(count) +
                              " snapshots, expected a single field");
  ScalarField out(grid);
  readValues(f.get(), out.v, path);
  return out;
}

void exportTrajectory(const Trajectory& traj, const std::string& basePath, ExportFormat fmt) {
  const char* names[3] = {"phi", "mu", "sigma"};
  const char* ext = fmt == ExportFormat::Csv ? "csv" : "raw64";
  for (int comp = 0; comp < 3; ++comp) {
    const std::string path = basePath + "_" + names[comp] + "." + ext;
    FilePtr f = openOrThrow(path, fmt == ExportFormat::Csv ? "w" : "wb");
    auto pick = [&](const StateSnapshot& s) -> const ScalarField& {
      return comp == 0 ? s.phi : comp == 1 ? s.mu : s.sigma;
    };
    if (fmt == ExportFormat::Csv) {
      const GridSpec& g = traj.snapshots.front().phi.grid;
      std::fprintf(f.get(), g.dim == 2 ? "t,x,y,value\n" : "t,x,value\n");
      for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
        const double t = traj.time.t(static_cast<int>(n));
        writeFieldCsvRows(f.get(), pick(traj.snapshots[n]), &t);
      }
    } else {
      writeHeader(f.get(), traj.snapshots.front().phi.grid,
                  static_cast<std::uint32_t>(traj.snapshots.size()));
      for (const StateSnapshot& s : traj.snapshots) writeValues(f.get(), pick(s).v);
    }
  }
}

void exportTimeField(const TimeField& fld, const TimeGrid& time, const std::string& path,
                     ExportFormat fmt) {
  FilePtr f = openOrThrow(path, fmt == ExportFormat::Csv ? "w" : "wb");
  if (fmt == ExportFormat::Csv) {
    const GridSpec& g = fld.nodes.front().grid;
    std::fprintf(f.get(), g.dim == 2 ? "t,x,y,value\n" : "t,x,value\n");
    for (int n = 0; n < fld.nodeCount(); ++n) {
      const double t = time.t(n);
      writeFieldCsvRows(f.get(), fld[n], &t);
    }
  } else {
    writeHeader(f.get(), fld.nodes.front().grid, static_cast<std::uint32_t>(fld.nodeCount()));
    for (const ScalarField& node : fld.nodes) writeValues(f.get(), node.v);
  }
}

TimeField importTimeFieldRaw(const std::string& path, const GridSpec& grid) {
  FilePtr f = openOrThrow(path, "rb");
  const std::uint32_t count = readHeader(f.get(), grid, path);
  TimeField out(static_cast<int>(count), grid);
  for (std::uint32_t n = 0; n < count; ++n) readValues(f.get(), out[static_cast<int>(n)].v, path);
  return out;
}

void exportMonitors(const std::vector<StepMonitor>& monitors, const std::string& path) {
  FilePtr f = openOrThrow(path, "w");
  std::fprintf(f.get(), "step,time,mass,mass_residual,energy,max_abs_phi,newton_iters\n");
  for (std::size_t i = 0; i < monitors.size(); ++i) {
    const StepMonitor& m = monitors[i];
    std::fprintf(f.get(), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", i + 1, m.time, m.mass,
                 m.massResidual, m.energy, m.maxAbsPhi, m.newtonIters);
  }
}

}  // namespace nloc
