#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsl/errors.hpp"
#include "fsl/mesh.hpp"

namespace fsl {

enum class ICKind { Step, Ramp, Tabulated };

/// Initial density profile on the rescaled domain [0,1].
///   step(alpha): constant alpha, dropping to 0 at the last node
///   ramp(m0):    piecewise-linear ramp, 0 at both ends of [0,1], peak 2*m0
///                at y = 1/4, total mass m0
///   tabulated:   one value per mesh node, last value 0
struct InitialCondition {
    /// Peak position of the ramp profile.
    static constexpr double kRampPeak = 0.25;

    ICKind kind = ICKind::Step;
    double alpha = 0.5;
    double m0 = 0.5;
    std::vector<double> values;

    static InitialCondition step(double alpha);
    static InitialCondition ramp(double m0);
    static InitialCondition tabulated(std::vector<double> values);

    /// Integral of the profile over [0,1]. Closed form for step and ramp,
    /// trapezoid on the mesh for tabulated data (same rule as mass()).
    double integral(const Mesh& mesh) const;

    /// Profile value at y in [0,1] (tabulated kind requires the mesh).
    std::vector<double> sample(const Mesh& mesh) const;

    void validate(int n_nodes) const;
};

/// Physical parameters of a run in the rescaled variables: interface speed
/// set by -kappa * du/dx at the boundary, logistic rate lambda = s(0)^2.
struct ProblemConfig {
    double kappa = -0.5;
    double lambda = 0.0;
    InitialCondition ic;
    double t_end = 1.0;
    /// |ds/dt| (rescaled units) above which the run stops and is handed to
    /// the blow-up extrapolator.
    double blowup_speed_threshold = 1e4;
    /// Fault injection for self-checks: relative perturbation applied to one
    /// family of difference coefficients. Zero in normal use.
    double stencil_perturbation = 0.0;

    void validate(int n_nodes) const;
};

struct StepperParams {
    double dt = 1e-4;
    double newton_tol = 1e-10;
    int newton_max_iters = 100;

    void validate() const;
};

/// Solution values on the mesh plus interface position at one instant.
struct State {
    std::vector<double> u;
    double s = 1.0;
    double t = 0.0;
};

enum class Termination {
    ReachedTEnd,
    SpeedExceeded,
    InterfaceHitOrigin,
    NewtonFailed,
    MassVanished,
    InstabilityDetected,
};

const char* to_string(Termination kind);

struct TerminationEvent {
    Termination kind = Termination::ReachedTEnd;
    double t = 0.0;
    double s = 0.0;
    double dsdt = 0.0;
};

struct TraceSample {
    double t = 0.0;
    double s = 0.0;
    double dsdt = 0.0;
    double mass = 0.0;
};

/// Time series of (t, s, ds/dt, M) plus how the run ended.
struct Trace {
    std::vector<TraceSample> samples;
    TerminationEvent termination;
    long total_steps = 0;
    long total_newton_iters = 0;
    int max_newton_iters = 0;
};

struct ProfileSnapshot {
    double t = 0.0;
    double s = 0.0;
    std::vector<double> u;
};

struct RunResult {
    Trace trace;
    std::vector<ProfileSnapshot> snapshots;
    State final_state;
};

/// Initial state: u from the initial condition (last node forced to 0),
/// s = 1, t = 0.
State make_initial_state(const Mesh& mesh, const InitialCondition& ic);

/// Trapezoid quadrature of u over the physical domain [0, s] (the mesh lives
/// on [0,1]; x = s*y).
double mass(const std::vector<double>& u, double s, const Mesh& mesh);
double mass(const State& state, const Mesh& mesh);

/// One implicit step of the boundary-fixed system. Holds the per-mesh
/// difference coefficients and the Newton workspace so repeated stepping does
/// not reallocate.
///
/// Unknowns are the nodal values together with the interface position; each
/// Newton iterate solves the bordered tridiagonal linearization (two
/// tridiagonal sweeps) with Armijo backtracking on the residual norm.
/// Convergence: max |change in u and s| below newton_tol on a full step.
class Stepper {
public:
    explicit Stepper(const Mesh& mesh, double stencil_perturbation = 0.0);

    struct Outcome {
        bool converged = false;
        bool instability = false;
        int iters = 0;
    };

    /// Advance state by dt (params.dt unless dt_override > 0). On success the
    /// state is updated in place and the boundary rows are enforced exactly
    /// (u[0] = u[1], u[n-1] = 0). On failure the state is left untouched.
    Outcome advance(State& state, const ProblemConfig& cfg, const StepperParams& params,
                    double dt_override = -1.0);

    const Mesh& mesh() const { return *mesh_; }

private:
    const Mesh* mesh_;
    int n_;
    // second derivative: 2*(alpha, gamma, delta); first derivative: (a, b, c)
    std::vector<double> d2l_, d2c_, d2r_;
    std::vector<double> d1l_, d1c_, d1r_;
    // one-sided derivative at y=1 over the last three nodes
    double gl_ = 0.0, gc_ = 0.0, gr_ = 0.0;
    // workspace
    std::vector<double> un_, res_, lo_, di_, up_, colv_, z_, p_, cand_, cprime_, dprime_;

    double residual_norm2(const std::vector<double>& un, double sn, const std::vector<double>& uo,
                          double so, double dt, const ProblemConfig& cfg) const;
    Outcome attempt(State& state, const ProblemConfig& cfg, const StepperParams& params,
                    double dt_override, bool presolve);
};

/// Convenience single-step entry point (constructs a fresh Stepper).
Stepper::Outcome step(State& state, const Mesh& mesh, const ProblemConfig& cfg,
                      const StepperParams& params);

/// Run until t_end or a terminating event. Samples every sample_every steps
/// (plus the initial state and the final step); optional profile snapshots are
/// taken at the first step reaching each requested time.
RunResult run(const ProblemConfig& cfg, const Mesh& mesh, const StepperParams& params,
              int sample_every, const std::vector<double>& snapshot_times = {});

} // namespace fsl
