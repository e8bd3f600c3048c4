#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fsl/analysis.hpp"
#include "fsl/config.hpp"
#include "fsl/phaseplane.hpp"

namespace fsl {

/// A finished single run: where it wrote, how it ended, what it was.
struct RunOutcome {
    std::filesystem::path dir;
    Classification classification;
    TerminationEvent termination;
    std::vector<std::string> files;
    double wall_seconds = 0.0;

    bool clean() const {
        return termination.kind != Termination::NewtonFailed &&
               termination.kind != Termination::InstabilityDetected;
    }
};

/// Execute one configured run and persist trace CSV, per-snapshot profile
/// CSVs, the final profile, summary/classification JSON, the canonical config
/// echo and the manifest into `dir` (created if needed).
RunOutcome run_to_directory(const RunConfig& cfg, const std::filesystem::path& dir);

struct SweepRow {
    double value = 0.0;
    std::string verdict;
    double speed = 0.0;
    double t_c = 0.0;
    double s_c = 0.0;
    double s_e = 0.0;
    bool clean = true;
};

struct SweepOutcome {
    std::vector<SweepRow> rows; // sorted by parameter value
    std::vector<RunOutcome> runs;
    std::filesystem::path aggregate_csv;
};

/// Run the configured sweep (one sub-directory per value, runs executed in
/// parallel) and write the aggregate CSV sorted by parameter value.
/// `threads` = 0 picks the hardware concurrency.
SweepOutcome sweep_to_directory(const RunConfig& base, const std::filesystem::path& dir,
                                unsigned threads = 0);

/// Evaluate kappa(c) over the grid and write `c,v_star,kappa,kappa_asymptotic`.
/// Optionally dumps each trajectory as `z,U,V` into traj_dir.
std::vector<WaveResult> phaseplane_to_csv(const std::vector<double>& c_grid, double dz,
                                          const std::filesystem::path& csv_path,
                                          const std::filesystem::path& traj_dir = {});

/// Apply one sweep-parameter assignment to a config copy.
RunConfig apply_sweep_value(const RunConfig& base, const std::string& parameter, double value);

} // namespace fsl
