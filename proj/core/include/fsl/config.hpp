#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fsl/mesh.hpp"
#include "fsl/solver.hpp"

namespace fsl {

/// Reporting-unit conversion. Runs configured through s0 integrate the
/// rescaled system internally and report in the original variables:
/// x = length * x~, t = time * t~, speed = (length/time) * speed~.
struct UnitScales {
    double length = 1.0;
    double time = 1.0;

    double speed() const { return length / time; }
};

/// One fully-specified run, as read from a flat key=value config file.
/// Times in the file (stepper.dt, t_end, snapshot times) are reporting-unit
/// values; blowup_speed_threshold is always in the rescaled units.
struct RunConfig {
    MeshSpec mesh{1001, 1e-6};
    StepperParams stepper{};
    ProblemConfig problem{};
    double s0 = 0.0; // 0: lambda given directly, otherwise lambda = s0^2
    int sample_every = 10;
    std::vector<double> snapshot_times;
    std::string label;

    std::string sweep_parameter;
    std::vector<double> sweep_values;

    UnitScales scales() const;
    /// Problem/stepper with reporting units converted to rescaled internals.
    ProblemConfig scaled_problem() const;
    StepperParams scaled_stepper() const;
    std::vector<double> scaled_snapshot_times() const;

    void validate() const;
};

/// Parse `key = value` lines ('#' comments, dotted keys). Unknown keys and
/// malformed values raise ConfigError naming the field.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Canonical echo of a config; parsing it reproduces the run exactly.
std::string config_to_text(const RunConfig& cfg);

/// Flat key -> value map of the same canonical echo (for the summary JSON).
std::map<std::string, std::string> config_to_map(const RunConfig& cfg);

/// 17-significant-digit round-trippable rendering of a double.
std::string format_full(double v);

} // namespace fsl
