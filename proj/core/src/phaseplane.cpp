#include "fsl/phaseplane.hpp"

#include <cmath>
#include <string>

namespace fsl {

void PhasePlaneOptions::validate() const {
    if (!(dz > 0.0) || dz > 1e-3) {
        throw ConfigError("phaseplane.dz must lie in (0, 1e-3], got " + std::to_string(dz));
    }
    if (!(launch_offset > 0.0) || launch_offset > 1e-4) {
        throw ConfigError("phaseplane.launch_offset must lie in (0, 1e-4], got " +
                          std::to_string(launch_offset));
    }
    if (max_steps < 10) {
        throw ConfigError("phaseplane.max_steps must be >= 10");
    }
}

namespace {

// Reflected-convention vector field along decreasing z:
//   dU = V, dV = -c V - U (1 - U)
// per unit of the integration parameter. The stored z runs downward, so U
// falls from the saddle value 1 and V goes negative along the relevant branch.
inline void field(double c, double u, double v, double& du, double& dv) {
    du = v;
    dv = -c * v - u * (1.0 - u);
}

} // namespace

Trajectory integrate_from_saddle(double c, const PhasePlaneOptions& opts) {
    if (!(c < 0.0)) {
        throw ConfigError("wave speed c must be negative, got " + std::to_string(c));
    }
    opts.validate();

    // Escape eigenvalue of the saddle for this branch and its direction,
    // oriented so U decreases and V becomes negative.
    const double mu = (-c + std::sqrt(c * c + 4.0)) / 2.0;
    const double norm = std::sqrt(1.0 + mu * mu);

    Trajectory traj;
    traj.c = c;
    traj.dz = opts.dz;
    traj.launch_offset = opts.launch_offset;

    double u = 1.0 - opts.launch_offset / norm;
    double v = -opts.launch_offset * mu / norm;
    double z = 0.0;
    traj.samples.push_back({z, u, v});

    const double dz = opts.dz;
    for (long k = 0; k < opts.max_steps; ++k) {
        double du1, dv1, du2, dv2;
        field(c, u, v, du1, dv1);
        const double ue = u + dz * du1;
        const double ve = v + dz * dv1;
        field(c, ue, ve, du2, dv2);
        const double un = u + 0.5 * dz * (du1 + du2);
        const double vn = v + 0.5 * dz * (dv1 + dv2);
        z -= dz;
        u = un;
        v = vn;
        traj.samples.push_back({z, u, v});
        if (u <= 0.0) {
            traj.crossed = true;
            return traj;
        }
    }
    throw NoCrossingError("trajectory for c = " + std::to_string(c) +
                          " did not reach U = 0 within the step cap");
}

double find_v_star(const Trajectory& traj) {
    if (!traj.crossed || traj.samples.size() < 2) {
        throw NoCrossingError("trajectory does not cross the V-axis");
    }
    const TrajectorySample& a = traj.samples[traj.samples.size() - 2];
    const TrajectorySample& b = traj.samples.back();
    const double theta = a.u / (a.u - b.u);
    return a.v + theta * (b.v - a.v);
}

WaveResult kappa_from_c(double c, const PhasePlaneOptions& opts) {
    const Trajectory traj = integrate_from_saddle(c, opts);
    const double v_star = find_v_star(traj);
    return {c, v_star, -c / v_star};
}

double c_from_kappa(double kappa, double tol, const PhasePlaneOptions& opts) {
    if (!(kappa > -1.0) || !(kappa < 0.0)) {
        throw ConfigError("kappa must lie in (-1, 0), got " + std::to_string(kappa));
    }
    if (!(tol > 0.0)) {
        throw ConfigError("tol must be positive");
    }

    constexpr double c_min = -1e4;  // search limits
    constexpr double c_max = -1e-4;

    // Resolve the front even for fast waves: feature width scales like 1/|c|.
    auto eval = [&](double c) {
        PhasePlaneOptions local = opts;
        local.dz = std::min(opts.dz, 1e-2 / (c * c + 1.0));
        return kappa_from_c(c, local).kappa;
    };

    // kappa(c) rises toward 0- as c -> 0- and falls toward -1+ as c -> -inf.
    double hi = c_max;
    double f_hi = eval(hi) - kappa;
    if (f_hi < 0.0) {
        throw BracketError("kappa(c) does not straddle the target near c = -1e-4");
    }
    double lo = -1.0;
    double f_lo = eval(lo) - kappa;
    while (f_lo > 0.0) {
        hi = lo;
        f_hi = f_lo;
        lo *= 10.0;
        if (lo < c_min) {
            throw BracketError("kappa(c) does not straddle " + std::to_string(kappa) +
                               " on [-1e4, -1e-4]");
        }
        f_lo = eval(lo) - kappa;
    }

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = eval(mid) - kappa;
        if (std::abs(f_mid) < tol) {
            return mid;
        }
        // one-to-one map assumed; a midpoint outside the bracketed range
        // means the assumption failed
        if (f_mid < std::min(f_lo, f_hi) - tol || f_mid > std::max(f_lo, f_hi) + tol) {
            throw BracketError("kappa(c) is not monotone on the bracket; refusing to guess");
        }
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        if (hi - lo < 1e-14 * std::abs(lo)) {
            break;
        }
    }
    throw BracketError("c_from_kappa failed to reach the requested tolerance");
}

double asymptotic_kappa(double c) {
    if (!(c < 0.0)) {
        throw ConfigError("wave speed c must be negative");
    }
    return -1.0 + 1.0 / (2.0 * c * c);
}

double asymptotic_profile(double c, double z) {
    if (!(c < 0.0)) {
        throw ConfigError("wave speed c must be negative");
    }
    const double e = std::exp(-c * z);
    return 1.0 - e + e * (2.0 * c * z - 1.0 + e) / (2.0 * c * c);
}

} // namespace fsl
