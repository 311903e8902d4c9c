// Field and trajectory serialization.
//
// csv: header "x[,y],value" (fields) or "t,x[,y],value" (trajectories),
// full double precision (17 significant digits).
//
// raw64: 32-byte header then little-endian float64 payload, row-major:
//   bytes 0..7   magic "NLOCOC01"
//   bytes 8..11  u32 dim
//   bytes 12..15 u32 nx
//   bytes 16..19 u32 ny (1 in 1D)
//   bytes 20..23 u32 snapshot count (1 for a single field)
//   bytes 24..31 u64 payload length in doubles
// Round-trips are bit-identical.
#pragma once

#include "nloc/state.hpp"

#include <string>
#include <vector>

namespace nloc {

enum class ExportFormat { Csv, Raw64 };

void exportField(const ScalarField& f, const std::string& path, ExportFormat fmt);
ScalarField importFieldRaw(const std::string& path, const GridSpec& grid);

// One file per variable: <base>_phi.<ext>, <base>_mu.<ext>, <base>_sigma.<ext>
void exportTrajectory(const Trajectory& traj, const std::string& basePath, ExportFormat fmt);

// Space-time field (controls, gradients) as one raw64/csv file with
// count = node count.
void exportTimeField(const TimeField& f, const TimeGrid& time, const std::string& path,
                     ExportFormat fmt);
TimeField importTimeFieldRaw(const std::string& path, const GridSpec& grid);

void exportMonitors(const std::vector<StepMonitor>& monitors, const std::string& path);

}  // namespace nloc
