#pragma once

#include <optional>
#include <string>

#include "fsl/mesh.hpp"
#include "fsl/solver.hpp"

namespace fsl {

enum class Verdict {
    TravellingWave,
    FiniteTimeBlowup,
    Extinction,
    CompleteMelting,
    Undetermined,
};

const char* to_string(Verdict v);

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double r_squared = 0.0;
    int n_points = 0;
};

struct BlowupEstimate {
    double t_c = 0.0;
    double s_c = 0.0;
    double speed_fit_r2 = 0.0;
    double position_fit_r2 = 0.0;
    double window_t_lo = 0.0;
    double window_t_hi = 0.0;
    int n_points = 0;
};

/// Outcome of a completed run with the fitted estimates backing it.
struct Classification {
    Verdict verdict = Verdict::Undetermined;
    double speed = 0.0;                // TravellingWave
    double t_c = 0.0, s_c = 0.0;       // FiniteTimeBlowup
    double s_e = 0.0;                  // Extinction
    double t_e = 0.0;                  // CompleteMelting
    double plateau_rel_change = 0.0;   // speed variation over the final window
    double q = 0.0;                    // superheating parameter of the run
    double lambda_tau = 0.0;           // lambda * (t_c - last sample time)
    std::optional<BlowupEstimate> blowup;
    std::string note;
};

/// Q = integral of the initial profile + 1/kappa. Extinction and blow-up
/// separate at Q = 0 when lambda = 0.
double superheating_Q(const InitialCondition& ic, double kappa, const Mesh& mesh);

/// lambda = 0 extinction position, s_e = 1 + kappa M(0) = kappa Q.
/// Throws RegimeError when Q >= 0 (the prediction would be unphysical).
double predict_extinction_boundary(const InitialCondition& ic, double kappa, const Mesh& mesh);

/// Linearized (Skellam) extinction estimate for lambda > 0:
/// s_e = kappa (Q + lambda * integral of M dt), the time integral taken by
/// trapezoid over the trace. Requires a MassVanished trace.
double skellam_extinction_estimate(const Trace& trace, const InitialCondition& ic, double kappa,
                                   double lambda, const Mesh& mesh);

/// max over samples of |s + kappa (M - Q)|; zero for the exact lambda = 0
/// conservation identity.
double conservation_residual(const Trace& trace, double q, double kappa);

/// Extrapolate the blow-up time and position from a SpeedExceeded trace:
/// speed^-2 is regressed against t over the last decade of speeds (vanishes
/// at t_c), then s against sqrt(t_c - t) (intercept s_c).
BlowupEstimate estimate_blowup(const Trace& trace);

enum class FitQuantity { Speed, Position };

/// Least-squares slope of ln(-ds/dt) or ln(s - s_c) against ln(t_c - t) over
/// the last decade of speeds. For Position, s_c is re-derived internally by
/// the same extrapolation used in estimate_blowup.
ScalingFit fit_loglog_slope(const Trace& trace, double t_c, FitQuantity quantity);

/// Near-blow-up interface law s = s_c + 2 sqrt(t_c-t) ln^{1/2}(-ln(t_c-t)),
/// valid for 0 < t_c - t < 1/e.
double blowup_scaling_law(double t, double t_c, double s_c);

/// Limiting density profile at blow-up,
/// u = -(1/kappa) (1 + 1 / (2 ln(-ln(s_c - x)))), valid for 0 < s_c - x < 1/e.
double blowup_profile(double x, double s_c, double kappa);

/// Quasi-steady front estimate near blow-up: u = 1 - e^{-s_dot (x - s)}.
double near_blowup_wave_profile(double x, double s, double s_dot);

struct ClassifyOptions {
    double plateau_window_frac = 0.2;
    double plateau_tol = 1e-4;
};

/// Single-verdict outcome classification; never throws (falls back to
/// Undetermined with a note).
Classification classify(const Trace& trace, const ProblemConfig& cfg, const Mesh& mesh,
                        const ClassifyOptions& opts = {});

} // namespace fsl
