#include "fsl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fsl {

InitialCondition InitialCondition::step(double alpha) {
    InitialCondition ic;
    ic.kind = ICKind::Step;
    ic.alpha = alpha;
    return ic;
}

InitialCondition InitialCondition::ramp(double m0) {
    InitialCondition ic;
    ic.kind = ICKind::Ramp;
    ic.m0 = m0;
    return ic;
}

InitialCondition InitialCondition::tabulated(std::vector<double> values) {
    InitialCondition ic;
    ic.kind = ICKind::Tabulated;
    ic.values = std::move(values);
    return ic;
}

void InitialCondition::validate(int n_nodes) const {
    switch (kind) {
    case ICKind::Step:
        if (!(alpha > 0.0) || alpha > 1.0) {
            throw ConfigError("ic.alpha must lie in (0, 1], got " + std::to_string(alpha));
        }
        break;
    case ICKind::Ramp:
        if (!(m0 > 0.0) || m0 > 0.5) {
            throw ConfigError("ic.m0 must lie in (0, 1/2], got " + std::to_string(m0));
        }
        break;
    case ICKind::Tabulated:
        if (static_cast<int>(values.size()) != n_nodes) {
            throw ConfigError("ic.values must supply one value per mesh node (" +
                              std::to_string(n_nodes) + "), got " + std::to_string(values.size()));
        }
        for (double v : values) {
            if (v < 0.0 || v > 1.0) {
                throw ConfigError("ic.values must lie in [0, 1]");
            }
        }
        if (values.back() != 0.0) {
            throw ConfigError("ic.values must end with 0 (density vanishes at the interface)");
        }
        break;
    }
}

double InitialCondition::integral(const Mesh& mesh) const {
    switch (kind) {
    case ICKind::Step:
        return alpha;
    case ICKind::Ramp:
        return m0;
    case ICKind::Tabulated: {
        double acc = 0.0;
        for (int i = 0; i + 1 < mesh.n(); ++i) {
            const double h = mesh.node(i + 1) - mesh.node(i);
            acc += 0.5 * h * (values[static_cast<size_t>(i)] + values[static_cast<size_t>(i + 1)]);
        }
        return acc;
    }
    }
    return 0.0;
}

std::vector<double> InitialCondition::sample(const Mesh& mesh) const {
    const int n = mesh.n();
    std::vector<double> u(static_cast<size_t>(n));
    switch (kind) {
    case ICKind::Step:
        std::fill(u.begin(), u.end(), alpha);
        break;
    case ICKind::Ramp:
        // piecewise-linear ramp peaking at 2*m0 a quarter of the way in and
        // falling to zero at the interface; total mass m0. A profile that
        // stays positive at the interface would put the run in the
        // instantaneous-blow-up regime for kappa < -1/F(1), so the ramp has
        // to vanish there.
        for (int i = 0; i < n; ++i) {
            const double y = mesh.node(i);
            const double shape = y < kRampPeak ? y / kRampPeak : (1.0 - y) / (1.0 - kRampPeak);
            u[static_cast<size_t>(i)] = 2.0 * m0 * shape;
        }
        break;
    case ICKind::Tabulated:
        u = values;
        break;
    }
    u.back() = 0.0;
    return u;
}

void ProblemConfig::validate(int n_nodes) const {
    if (kappa == 0.0) {
        throw ConfigError("kappa must be nonzero");
    }
    if (lambda < 0.0) {
        throw ConfigError("lambda must be >= 0, got " + std::to_string(lambda));
    }
    if (!(t_end > 0.0)) {
        throw ConfigError("t_end must be positive, got " + std::to_string(t_end));
    }
    if (!(blowup_speed_threshold > 0.0)) {
        throw ConfigError("blowup_speed_threshold must be positive");
    }
    ic.validate(n_nodes);
}

void StepperParams::validate() const {
    if (!(dt > 0.0)) {
        throw ConfigError("stepper.dt must be positive, got " + std::to_string(dt));
    }
    if (!(newton_tol > 0.0)) {
        throw ConfigError("stepper.newton_tol must be positive");
    }
    if (newton_max_iters < 2) {
        throw ConfigError("stepper.newton_max_iters must be >= 2, got " +
                          std::to_string(newton_max_iters));
    }
}

const char* to_string(Termination kind) {
    switch (kind) {
    case Termination::ReachedTEnd: return "ReachedTEnd";
    case Termination::SpeedExceeded: return "SpeedExceeded";
    case Termination::InterfaceHitOrigin: return "InterfaceHitOrigin";
    case Termination::NewtonFailed: return "NewtonFailed";
    case Termination::MassVanished: return "MassVanished";
    case Termination::InstabilityDetected: return "InstabilityDetected";
    }
    return "Unknown";
}

State make_initial_state(const Mesh& mesh, const InitialCondition& ic) {
    ic.validate(mesh.n());
    State st;
    st.u = ic.sample(mesh);
    st.u[0] = st.u[1]; // discrete no-flux holds from the start
    st.s = 1.0;
    st.t = 0.0;
    return st;
}

double mass(const std::vector<double>& u, double s, const Mesh& mesh) {
    double acc = 0.0;
    for (int i = 0; i + 1 < mesh.n(); ++i) {
        const double h = mesh.node(i + 1) - mesh.node(i);
        acc += 0.5 * h * (u[static_cast<size_t>(i)] + u[static_cast<size_t>(i + 1)]);
    }
    return s * acc;
}

double mass(const State& state, const Mesh& mesh) { return mass(state.u, state.s, mesh); }

Stepper::Stepper(const Mesh& mesh, double stencil_perturbation) : mesh_(&mesh), n_(mesh.n()) {
    const auto& y = mesh.nodes();
    const size_t n = static_cast<size_t>(n_);
    d2l_.assign(n, 0.0);
    d2c_.assign(n, 0.0);
    d2r_.assign(n, 0.0);
    d1l_.assign(n, 0.0);
    d1c_.assign(n, 0.0);
    d1r_.assign(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        const double hm = y[i] - y[i - 1];
        const double hp = y[i + 1] - y[i];
        const double hs = hp + hm;
        // u_yy ~ 2 [ u_{i-1}/(hm*hs) - u_i/(hm*hp) + u_{i+1}/(hp*hs) ]
        d2l_[i] = 2.0 / (hm * hs);
        d2c_[i] = -2.0 / (hm * hp);
        d2r_[i] = 2.0 / (hp * hs) * (1.0 + stencil_perturbation);
        // u_y ~ -hp/(hm*hs) u_{i-1} + (hp-hm)/(hm*hp) u_i + hm/(hp*hs) u_{i+1}
        d1l_[i] = -hp / (hm * hs);
        d1c_[i] = (hp - hm) / (hm * hp);
        d1r_[i] = hm / (hp * hs);
    }
    {
        // one-sided second-order derivative at y=1 from nodes n-3, n-2, n-1
        const double hp = y[n - 1] - y[n - 2];
        const double hm = y[n - 2] - y[n - 3];
        const double hs = hp + hm;
        gl_ = hp / (hm * hs);
        gc_ = -hs / (hm * hp);
        gr_ = (2.0 * hp + hm) / (hp * hs);
    }
    un_.assign(n, 0.0);
    res_.assign(n, 0.0);
    lo_.assign(n, 0.0);
    di_.assign(n, 0.0);
    up_.assign(n, 0.0);
    colv_.assign(n, 0.0);
    z_.assign(n, 0.0);
    p_.assign(n, 0.0);
    cand_.assign(n, 0.0);
    cprime_.assign(n, 0.0);
    dprime_.assign(n, 0.0);
}

namespace {

// Thomas elimination; rhs is overwritten with the solution.
void solve_tridiagonal(const std::vector<double>& lo, const std::vector<double>& di,
                       const std::vector<double>& up, std::vector<double>& rhs,
                       std::vector<double>& cprime, std::vector<double>& dprime) {
    const size_t n = di.size();
    cprime[0] = up[0] / di[0];
    dprime[0] = rhs[0] / di[0];
    for (size_t i = 1; i < n; ++i) {
        const double m = di[i] - lo[i] * cprime[i - 1];
        cprime[i] = up[i] / m;
        dprime[i] = (rhs[i] - lo[i] * dprime[i - 1]) / m;
    }
    rhs[n - 1] = dprime[n - 1];
    for (size_t i = n - 1; i-- > 0;) {
        rhs[i] = dprime[i] - cprime[i] * rhs[i + 1];
    }
}

} // namespace

double Stepper::residual_norm2(const std::vector<double>& un, double sn,
                               const std::vector<double>& uo, double so, double dt,
                               const ProblemConfig& cfg) const {
    const auto& y = mesh_->nodes();
    const size_t n = static_cast<size_t>(n_);
    const double sdot = (sn - so) / dt;
    const double diff = 1.0 / (so * so);
    double acc = 0.0;

    double r = un[1] - un[0];
    acc += r * r;
    for (size_t i = 1; i + 1 < n; ++i) {
        const double adv = (y[i] / so) * sdot;
        r = (un[i] - uo[i]) / dt -
            diff * (d2l_[i] * un[i - 1] + d2c_[i] * un[i] + d2r_[i] * un[i + 1]) -
            adv * (d1l_[i] * un[i - 1] + d1c_[i] * un[i] + d1r_[i] * un[i + 1]) -
            cfg.lambda * un[i] * (1.0 - un[i]);
        r *= dt; // bring the transport rows to the scale of a u-change
        acc += r * r;
    }
    r = un[n - 1];
    acc += r * r;

    const double dyu = gl_ * un[n - 3] + gc_ * un[n - 2] + gr_ * un[n - 1];
    const double rs = sn - so + dt * cfg.kappa / so * dyu;
    acc += rs * rs;
    return acc;
}

Stepper::Outcome Stepper::advance(State& state, const ProblemConfig& cfg,
                                  const StepperParams& params, double dt_override) {
    Outcome out = attempt(state, cfg, params, dt_override, false);
    if (!out.converged) {
        // steep data (a step-function start, say) can make the interface
        // feedback critical; smooth it with a frozen-interface solve first
        Outcome retry = attempt(state, cfg, params, dt_override, true);
        retry.iters += out.iters;
        out = retry;
    }
    return out;
}

Stepper::Outcome Stepper::attempt(State& state, const ProblemConfig& cfg,
                                  const StepperParams& params, double dt_override, bool presolve) {
    const auto& y = mesh_->nodes();
    const size_t n = static_cast<size_t>(n_);
    const double dt = dt_override > 0.0 ? dt_override : params.dt;
    const double so = state.s;
    const std::vector<double>& uo = state.u;

    un_ = state.u;
    double sn = so;
    const double diff = 1.0 / (so * so);

    Outcome out;
    bool converged = false;

    if (presolve) {
        // backward-Euler diffusion/reaction solve with the interface frozen
        for (int it = 0; it < params.newton_max_iters; ++it) {
            res_[0] = un_[1] - un_[0];
            di_[0] = -1.0;
            up_[0] = 1.0;
            lo_[0] = 0.0;
            for (size_t i = 1; i + 1 < n; ++i) {
                res_[i] = (un_[i] - uo[i]) / dt -
                          diff * (d2l_[i] * un_[i - 1] + d2c_[i] * un_[i] + d2r_[i] * un_[i + 1]) -
                          cfg.lambda * un_[i] * (1.0 - un_[i]);
                lo_[i] = -diff * d2l_[i];
                di_[i] = 1.0 / dt - diff * d2c_[i] - cfg.lambda * (1.0 - 2.0 * un_[i]);
                up_[i] = -diff * d2r_[i];
            }
            res_[n - 1] = un_[n - 1];
            lo_[n - 1] = 0.0;
            di_[n - 1] = 1.0;

            z_ = res_;
            for (double& v : z_) v = -v;
            solve_tridiagonal(lo_, di_, up_, z_, cprime_, dprime_);
            double change = 0.0;
            for (size_t i = 0; i < n; ++i) {
                un_[i] += z_[i];
                change = std::max(change, std::abs(z_[i]));
            }
            ++out.iters;
            if (!std::isfinite(change)) {
                return out;
            }
            if (change < params.newton_tol) {
                break;
            }
        }
    }

    for (int it = 0; it < params.newton_max_iters; ++it) {
        const double sdot = (sn - so) / dt;

        // residual and bordered Jacobian (tridiagonal block + s column/row)
        res_[0] = un_[1] - un_[0];
        di_[0] = -1.0;
        up_[0] = 1.0;
        colv_[0] = 0.0;
        for (size_t i = 1; i + 1 < n; ++i) {
            const double adv = (y[i] / so) * sdot;
            const double d1 = d1l_[i] * un_[i - 1] + d1c_[i] * un_[i] + d1r_[i] * un_[i + 1];
            res_[i] = (un_[i] - uo[i]) / dt -
                      diff * (d2l_[i] * un_[i - 1] + d2c_[i] * un_[i] + d2r_[i] * un_[i + 1]) -
                      adv * d1 - cfg.lambda * un_[i] * (1.0 - un_[i]);
            lo_[i] = -diff * d2l_[i] - adv * d1l_[i];
            di_[i] = 1.0 / dt - diff * d2c_[i] - adv * d1c_[i] - cfg.lambda * (1.0 - 2.0 * un_[i]);
            up_[i] = -diff * d2r_[i] - adv * d1r_[i];
            colv_[i] = -(y[i] / (so * dt)) * d1;
        }
        res_[n - 1] = un_[n - 1];
        lo_[n - 1] = 0.0;
        di_[n - 1] = 1.0;
        colv_[n - 1] = 0.0;

        const double dyu = gl_ * un_[n - 3] + gc_ * un_[n - 2] + gr_ * un_[n - 1];
        const double res_s = sn - so + dt * cfg.kappa / so * dyu;
        const double wl = dt * cfg.kappa / so * gl_;
        const double wc = dt * cfg.kappa / so * gc_;
        const double wr = dt * cfg.kappa / so * gr_;

        // bordered elimination: T z = -R_u, T p = -v,
        // ds = (-R_s - w.z) / (1 + w.p), du = z + p ds
        z_ = res_;
        for (double& v : z_) v = -v;
        solve_tridiagonal(lo_, di_, up_, z_, cprime_, dprime_);
        p_ = colv_;
        for (double& v : p_) v = -v;
        solve_tridiagonal(lo_, di_, up_, p_, cprime_, dprime_);

        const double wz = wl * z_[n - 3] + wc * z_[n - 2] + wr * z_[n - 1];
        const double wp = wl * p_[n - 3] + wc * p_[n - 2] + wr * p_[n - 1];
        const double denom = 1.0 + wp;
        if (denom == 0.0 || !std::isfinite(denom)) {
            break;
        }
        const double ds_full = (-res_s - wz) / denom;

        double full_change = std::abs(ds_full);
        for (size_t i = 0; i < n; ++i) {
            full_change = std::max(full_change, std::abs(z_[i] + p_[i] * ds_full));
        }
        out.iters = it + 1;
        if (full_change < params.newton_tol) {
            // the undamped increment is already below tolerance
            for (size_t i = 0; i < n; ++i) {
                un_[i] += z_[i] + p_[i] * ds_full;
            }
            sn += ds_full;
            converged = true;
            break;
        }

        // Armijo backtracking on the squared residual norm
        const double phi0 = residual_norm2(un_, sn, uo, so, dt, cfg);
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 30; ++bt) {
            const double st = sn + lambda * ds_full;
            bool finite = std::isfinite(st) && st > 0.0;
            if (finite) {
                for (size_t i = 0; i < n; ++i) {
                    cand_[i] = un_[i] + lambda * (z_[i] + p_[i] * ds_full);
                    if (!std::isfinite(cand_[i])) {
                        finite = false;
                        break;
                    }
                }
            }
            if (finite) {
                const double phi = residual_norm2(cand_, st, uo, so, dt, cfg);
                if (phi <= phi0 * (1.0 - 1e-4 * lambda)) {
                    un_.swap(cand_);
                    sn = st;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            break; // stagnated; report failure
        }
        if (converged) {
            break;
        }
    }

    if (!converged) {
        return out;
    }

    for (size_t i = 0; i < n; ++i) {
        if (un_[i] < -0.05 || un_[i] > 1.05 || !std::isfinite(un_[i])) {
            out.instability = true;
        }
    }

    // impose the boundary rows exactly
    un_[0] = un_[1];
    un_[n - 1] = 0.0;

    state.u = un_;
    state.s = sn;
    state.t += dt;
    out.converged = true;
    return out;
}

Stepper::Outcome step(State& state, const Mesh& mesh, const ProblemConfig& cfg,
                      const StepperParams& params) {
    Stepper stepper(mesh, cfg.stencil_perturbation);
    return stepper.advance(state, cfg, params);
}

RunResult run(const ProblemConfig& cfg, const Mesh& mesh, const StepperParams& params,
              int sample_every, const std::vector<double>& snapshot_times) {
    cfg.validate(mesh.n());
    params.validate();
    if (sample_every < 1) {
        throw ConfigError("sample_every must be >= 1, got " + std::to_string(sample_every));
    }

    RunResult result;
    Trace& trace = result.trace;
    Stepper stepper(mesh, cfg.stencil_perturbation);
    State state = make_initial_state(mesh, cfg.ic);

    std::vector<double> snap_times = snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    size_t next_snap = 0;
    // snapshots requested at t<=0 capture the initial condition
    while (next_snap < snap_times.size() && snap_times[next_snap] <= 0.0) {
        result.snapshots.push_back({state.t, state.s, state.u});
        ++next_snap;
    }

    trace.samples.push_back({0.0, state.s, 0.0, mass(state, mesh)});

    auto finish = [&](Termination kind, double dsdt) {
        trace.termination = {kind, state.t, state.s, dsdt};
        result.final_state = state;
    };

    long k = 0;
    bool sampled_last = true;
    bool speed_armed = false;
    double last_dsdt = 0.0;
    double last_mass = trace.samples.front().mass;
    while (state.t < cfg.t_end - 0.5 * params.dt || trace.total_steps == 0) {
        double dt = std::min(params.dt, cfg.t_end - state.t);
        if (dt <= 0.0) {
            break;
        }
        State saved = state;
        Stepper::Outcome out = stepper.advance(state, cfg, params, dt);
        if (!out.converged) {
            // one retry at half the step
            state = saved;
            dt *= 0.5;
            out = stepper.advance(state, cfg, params, dt);
            if (!out.converged) {
                state = saved;
                if (!sampled_last) {
                    trace.samples.push_back({state.t, state.s, last_dsdt, last_mass});
                }
                finish(Termination::NewtonFailed, last_dsdt);
                return result;
            }
        }
        ++k;
        trace.total_steps = k;
        trace.total_newton_iters += out.iters;
        trace.max_newton_iters = std::max(trace.max_newton_iters, out.iters);

        const double dsdt = (state.s - saved.s) / dt;
        last_dsdt = dsdt;
        const double m = mass(state, mesh);
        last_mass = m;

        sampled_last = (k % sample_every == 0);
        if (sampled_last) {
            trace.samples.push_back({state.t, state.s, dsdt, m});
        }
        while (next_snap < snap_times.size() && state.t >= snap_times[next_snap]) {
            result.snapshots.push_back({state.t, state.s, state.u});
            ++next_snap;
        }

        auto record_final_sample = [&]() {
            if (!sampled_last) {
                trace.samples.push_back({state.t, state.s, dsdt, m});
            }
        };

        if (out.instability) {
            record_final_sample();
            finish(Termination::InstabilityDetected, dsdt);
            return result;
        }
        // Rough initial data starts with a t^{-1/2} speed transient that can
        // top the threshold; the check arms once the speed has come down.
        if (!speed_armed && std::abs(dsdt) <= cfg.blowup_speed_threshold) {
            speed_armed = true;
        } else if (speed_armed && std::abs(dsdt) > cfg.blowup_speed_threshold) {
            record_final_sample();
            finish(Termination::SpeedExceeded, dsdt);
            return result;
        }
        if (state.s <= mesh.dy_min()) {
            record_final_sample();
            finish(Termination::InterfaceHitOrigin, dsdt);
            return result;
        }
        if (m < 1e-8 && std::abs(dsdt) < 1e-8) {
            record_final_sample();
            finish(Termination::MassVanished, dsdt);
            return result;
        }
    }

    if (!sampled_last) {
        trace.samples.push_back(
            {state.t, state.s, last_dsdt, mass(state, mesh)});
    }
    finish(Termination::ReachedTEnd, last_dsdt);
    return result;
}

} // namespace fsl
