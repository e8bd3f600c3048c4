#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fsl {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    /// Skip the slow full-resolution runs; criterion 4 then runs only its
    /// reduced N=251 mode and criteria 6-10 shrink where allowed.
    bool fast = false;
    /// Fault injection: forwarded to the solver's difference coefficients so
    /// a deliberately broken scheme makes the conservation criterion fail.
    double stencil_perturbation = 0.0;
    /// Scratch directory for the determinism check (temp dir when empty).
    std::filesystem::path scratch_dir;
};

/// Run every acceptance criterion and report one result per criterion.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// Machine-readable report of the results.
std::string acceptance_report_json(const std::vector<CriterionResult>& results);

} // namespace fsl
