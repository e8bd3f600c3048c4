#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fsl/analysis.hpp"
#include "fsl/config.hpp"
#include "fsl/mesh.hpp"
#include "fsl/solver.hpp"

namespace fsl {

/// Trace CSV: `t,s,dsdt,M`, one row per sample, 17 significant digits,
/// values converted to reporting units.
void write_trace_csv(const std::filesystem::path& path, const Trace& trace,
                     const UnitScales& scales);

/// Profile CSV: `y,x,u` with x = s*y at the snapshot time.
void write_profile_csv(const std::filesystem::path& path, const Mesh& mesh,
                       const ProfileSnapshot& snap, const UnitScales& scales);

struct NewtonStats {
    long total_steps = 0;
    long total_iters = 0;
    int max_iters = 0;
};

/// Summary JSON: config echo, termination event, final (t, s, M), Newton
/// iteration statistics.
void write_summary_json(const std::filesystem::path& path, const RunConfig& cfg,
                        const Trace& trace, const UnitScales& scales);

/// Classification JSON: verdict tag, estimates, fit diagnostics, regime flags.
void write_classification_json(const std::filesystem::path& path, const Classification& cls,
                               const UnitScales& scales, double lambda);

/// Manifest JSON: config echo, tool version, wall-clock seconds, every file
/// the run emitted (including the manifest itself).
void write_manifest_json(const std::filesystem::path& path, const RunConfig& cfg,
                         double wall_seconds, const std::vector<std::string>& files);

} // namespace fsl
