#pragma once

#include <vector>

#include "fsl/errors.hpp"

namespace fsl {

struct PhasePlaneOptions {
    double dz = 1e-4;
    double launch_offset = 1e-6;
    long max_steps = 10'000'000;

    void validate() const;
};

struct TrajectorySample {
    double z = 0.0;
    double u = 0.0;
    double v = 0.0;
};

/// Phase-plane orbit for a retreating wave of speed c < 0, in the reflected
/// convention: launched just off the saddle (U,V)=(1,0), z decreasing, U
/// falling from 1 toward 0 with V <= 0 (fourth quadrant). When crossed is
/// true the last sample lies past U=0 so the V-axis crossing brackets.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    double c = 0.0;
    double dz = 0.0;
    double launch_offset = 0.0;
    bool crossed = false;
};

struct WaveResult {
    double c = 0.0;
    double v_star = 0.0;
    double kappa = 0.0;
};

/// Heun integration of the travelling-wave system from the saddle at (1,0)
/// until U <= 0. Throws NoCrossingError if the step cap is reached first.
Trajectory integrate_from_saddle(double c, const PhasePlaneOptions& opts = {});

/// V at the U=0 crossing, linearly interpolated between the bracketing
/// samples. Negative for every retreating wave.
double find_v_star(const Trajectory& traj);

/// Map wave speed c < 0 to the leakage coefficient kappa = -c / V*.
WaveResult kappa_from_c(double c, const PhasePlaneOptions& opts = {});

/// Invert the kappa(c) map by bisection over c in [-1e4, -1e-4] with bracket
/// expansion. tol applies to |kappa(c) - kappa|. Throws BracketError when the
/// map does not straddle the requested value.
double c_from_kappa(double kappa, double tol, const PhasePlaneOptions& opts = {});

/// Large-|c| limit of the kappa(c) map: -1 + 1/(2 c^2).
double asymptotic_kappa(double c);

/// Large-|c| wave profile with the front at z=0 (z <= 0 physical):
/// U = 1 - e^{-cz} + e^{-cz} (2cz - 1 + e^{-cz}) / (2c^2).
double asymptotic_profile(double c, double z);

} // namespace fsl
