#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fsl/mesh.hpp"
#include "fsl/solver.hpp"
#include "fsl/analysis.hpp"

using namespace fsl;

namespace {

// Dense Newton oracle for one implicit step on a small mesh: the same
// discrete equations assembled from scratch, solved with a finite-difference
// Jacobian and Gaussian elimination.
struct DenseStepOracle {
    std::vector<double> y;
    double kappa, lambda, dt;

    std::vector<double> residual(const std::vector<double>& x, const std::vector<double>& uo,
                                 double so) const {
        const size_t n = y.size();
        const double sn = x[n];
        const double sdot = (sn - so) / dt;
        std::vector<double> f(n + 1);
        f[0] = x[1] - x[0];
        for (size_t i = 1; i + 1 < n; ++i) {
            const double hm = y[i] - y[i - 1];
            const double hp = y[i + 1] - y[i];
            const double hs = hp + hm;
            const double al = 1.0 / (hm * hs);
            const double ga = -1.0 / (hm * hp);
            const double de = 1.0 / (hp * hs);
            const double a1 = -hp / (hm * hs);
            const double b1 = (hp - hm) / (hm * hp);
            const double c1 = hm / (hp * hs);
            const double uyy = 2.0 * (al * x[i - 1] + ga * x[i] + de * x[i + 1]);
            const double uy = a1 * x[i - 1] + b1 * x[i] + c1 * x[i + 1];
            f[i] = (x[i] - uo[i]) / dt - uyy / (so * so) - (y[i] / so) * sdot * uy -
                   lambda * x[i] * (1.0 - x[i]);
        }
        f[n - 1] = x[n - 1];
        const double hp = y[n - 1] - y[n - 2];
        const double hm = y[n - 2] - y[n - 3];
        const double hs = hp + hm;
        const double dyu = hp / (hm * hs) * x[n - 3] - hs / (hm * hp) * x[n - 2] +
                           (2.0 * hp + hm) / (hp * hs) * x[n - 1];
        f[n] = sn - so + dt * kappa / so * dyu;
        return f;
    }

    // Newton with numerical Jacobian + Gaussian elimination
    void solve(std::vector<double>& u, double& s, double so) const {
        const size_t m = y.size() + 1;
        std::vector<double> x(u);
        x.push_back(s);
        const std::vector<double> uo = u;
        for (int it = 0; it < 50; ++it) {
            std::vector<double> f = residual(x, uo, so);
            std::vector<std::vector<double>> jac(m, std::vector<double>(m));
            for (size_t j = 0; j < m; ++j) {
                const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
                std::vector<double> xp = x;
                xp[j] += h;
                const std::vector<double> fp = residual(xp, uo, so);
                for (size_t i = 0; i < m; ++i) {
                    jac[i][j] = (fp[i] - f[i]) / h;
                }
            }
            // Gaussian elimination with partial pivoting on [jac | -f]
            std::vector<double> rhs(m);
            for (size_t i = 0; i < m; ++i) rhs[i] = -f[i];
            for (size_t col = 0; col < m; ++col) {
                size_t piv = col;
                for (size_t r = col + 1; r < m; ++r) {
                    if (std::abs(jac[r][col]) > std::abs(jac[piv][col])) piv = r;
                }
                std::swap(jac[col], jac[piv]);
                std::swap(rhs[col], rhs[piv]);
                for (size_t r = col + 1; r < m; ++r) {
                    const double factor = jac[r][col] / jac[col][col];
                    for (size_t c = col; c < m; ++c) jac[r][c] -= factor * jac[col][c];
                    rhs[r] -= factor * rhs[col];
                }
            }
            std::vector<double> dx(m);
            for (size_t i = m; i-- > 0;) {
                double acc = rhs[i];
                for (size_t c = i + 1; c < m; ++c) acc -= jac[i][c] * dx[c];
                dx[i] = acc / jac[i][i];
            }
            double change = 0.0;
            for (size_t i = 0; i < m; ++i) {
                x[i] += dx[i];
                change = std::max(change, std::abs(dx[i]));
            }
            if (change < 1e-13) break;
        }
        for (size_t i = 0; i < y.size(); ++i) u[i] = x[i];
        s = x[y.size()];
    }
};

// Integral of the piecewise-linear interpolant by composite Simpson on a
// 10x refinement of every mesh interval.
double refined_simpson_of_interpolant(const std::vector<double>& u, const Mesh& mesh) {
    double total = 0.0;
    for (int i = 0; i + 1 < mesh.n(); ++i) {
        const double a = mesh.node(i);
        const double b = mesh.node(i + 1);
        const double ua = u[static_cast<size_t>(i)];
        const double ub = u[static_cast<size_t>(i + 1)];
        auto lin = [&](double yy) { return ua + (ub - ua) * (yy - a) / (b - a); };
        const int sub = 10;
        const double h = (b - a) / sub;
        for (int k = 0; k < sub; ++k) {
            const double lo = a + k * h;
            total += h / 6.0 * (lin(lo) + 4.0 * lin(lo + 0.5 * h) + lin(lo + h));
        }
    }
    return total;
}

} // namespace

TEST_CASE("initial states") {
    const Mesh mesh = build_mesh({1001, 1e-6});

    SUBCASE("step(0.5)") {
        const State st = make_initial_state(mesh, InitialCondition::step(0.5));
        CHECK(st.s == 1.0);
        CHECK(st.t == 0.0);
        CHECK(st.u[0] == 0.5);
        CHECK(st.u[500] == 0.5);
        CHECK(st.u.back() == 0.0);
        const double m = mass(st, mesh);
        CHECK(m < 0.5);              // trapezoid loses half the last cell
        CHECK(std::abs(m - 0.5) < 1e-5);
    }

    SUBCASE("ramp(0.5) peaks at 2*m0 a quarter in and carries mass m0") {
        const InitialCondition ic = InitialCondition::ramp(0.5);
        const State st = make_initial_state(mesh, ic);
        CHECK(ic.integral(mesh) == doctest::Approx(0.5));
        CHECK(std::abs(mass(st, mesh) - 0.5) < 1e-5);
        // peak value 1 at y = 1/4, zero at both ends
        int peak = 0;
        for (int i = 0; i < mesh.n(); ++i) {
            if (st.u[static_cast<size_t>(i)] > st.u[static_cast<size_t>(peak)]) peak = i;
        }
        CHECK(mesh.node(peak) == doctest::Approx(0.25).epsilon(1e-2));
        CHECK(st.u[static_cast<size_t>(peak)] == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(st.u.back() == 0.0);
    }

    SUBCASE("tabulated zeros have zero mass") {
        const State st = make_initial_state(
            mesh, InitialCondition::tabulated(std::vector<double>(1001, 0.0)));
        CHECK(mass(st, mesh) == 0.0);
    }

    SUBCASE("validation failures name the field") {
        CHECK_THROWS_WITH_AS(make_initial_state(mesh, InitialCondition::step(1.5)),
                             doctest::Contains("ic.alpha"), ConfigError);
        CHECK_THROWS_WITH_AS(make_initial_state(mesh, InitialCondition::ramp(0.7)),
                             doctest::Contains("ic.m0"), ConfigError);
        auto bad = std::vector<double>(1001, 0.2);
        CHECK_THROWS_AS(make_initial_state(mesh, InitialCondition::tabulated(bad)), ConfigError);
    }
}

TEST_CASE("single step matches a dense-Newton oracle on a 5-node mesh") {
    const Mesh mesh = build_mesh({5, 0.25}); // uniform limit
    ProblemConfig cfg;
    cfg.kappa = -0.8;
    cfg.lambda = 0.7;
    cfg.t_end = 1.0;
    cfg.ic = InitialCondition::step(0.8); // placeholder; state set manually
    StepperParams params;
    params.dt = 1e-3;

    State st;
    st.u = {0.8, 0.8, 0.6, 0.3, 0.0};
    st.s = 0.9;
    st.t = 0.0;

    std::vector<double> u_oracle = st.u;
    double s_oracle = st.s;
    const DenseStepOracle oracle{mesh.nodes(), cfg.kappa, cfg.lambda, params.dt};
    oracle.solve(u_oracle, s_oracle, st.s);

    Stepper stepper(mesh);
    const auto out = stepper.advance(st, cfg, params);
    REQUIRE(out.converged);

    CHECK(std::abs(st.s - s_oracle) < 1e-10);
    for (size_t i = 0; i < st.u.size(); ++i) {
        CHECK(std::abs(st.u[i] - u_oracle[i]) < 1e-10);
    }
}

TEST_CASE("mass quadrature") {
    const Mesh mesh = build_mesh({1001, 1e-6});

    SUBCASE("constant with zero boundary node") {
        std::vector<double> u(1001, 0.3);
        u.back() = 0.0;
        const double expect = 0.3 * (1.0 - 0.5 * mesh.dy_min());
        CHECK(mass(u, 1.0, mesh) == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("triangle scaled by the domain length") {
        std::vector<double> u(1001);
        for (int i = 0; i < 1001; ++i) u[static_cast<size_t>(i)] = 1.0 - mesh.node(i);
        CHECK(std::abs(mass(u, 2.0, mesh) - 1.0) < 1e-6);
    }

    SUBCASE("random smooth profile against a refined-quadrature oracle") {
        std::vector<double> u(1001);
        for (int i = 0; i < 1001; ++i) {
            const double y = mesh.node(i);
            u[static_cast<size_t>(i)] = std::sin(1.3 * y) * std::exp(-0.5 * y) + 0.1 * (1.0 - y);
        }
        u.back() = 0.0;
        const double oracle = refined_simpson_of_interpolant(u, mesh);
        CHECK(std::abs(mass(u, 1.7, mesh) - 1.7 * oracle) < 1e-6);
        CHECK(std::abs(mass(u, 1.7, mesh) - 1.7 * oracle) < 1e-12); // exact same interpolant
    }
}

TEST_CASE("zero density is a bitwise fixed point") {
    const Mesh mesh = build_mesh({101, 1e-4});
    ProblemConfig cfg;
    cfg.kappa = -0.9;
    cfg.lambda = 0.0;
    cfg.t_end = 1.0;
    cfg.ic = InitialCondition::tabulated(std::vector<double>(101, 0.0));
    StepperParams params;
    State st = make_initial_state(mesh, cfg.ic);
    Stepper stepper(mesh);
    for (int k = 0; k < 50; ++k) {
        const auto out = stepper.advance(st, cfg, params);
        REQUIRE(out.converged);
    }
    CHECK(st.s == 1.0);
    for (double v : st.u) CHECK(v == 0.0);
}

TEST_CASE("boundary rows hold exactly after every converged step") {
    const Mesh mesh = build_mesh({201, 1e-5});
    ProblemConfig cfg;
    cfg.kappa = -0.5;
    cfg.lambda = 1.0;
    cfg.t_end = 1.0;
    cfg.ic = InitialCondition::step(0.8);
    StepperParams params;
    State st = make_initial_state(mesh, cfg.ic);
    Stepper stepper(mesh);
    for (int k = 0; k < 100; ++k) {
        REQUIRE(stepper.advance(st, cfg, params).converged);
        CHECK(st.u[0] == st.u[1]);
        CHECK(st.u.back() == 0.0);
    }
}

TEST_CASE("failed steps leave the state untouched") {
    const Mesh mesh = build_mesh({1001, 1e-6});
    ProblemConfig cfg;
    cfg.kappa = -3.0; // strong enough that two sweeps cannot converge
    cfg.lambda = 1.0;
    cfg.t_end = 1.0;
    cfg.ic = InitialCondition::step(0.5);
    StepperParams params;
    params.newton_max_iters = 2;
    State st = make_initial_state(mesh, cfg.ic);
    const State before = st;
    Stepper stepper(mesh);
    const auto out = stepper.advance(st, cfg, params);
    CHECK_FALSE(out.converged);
    CHECK(st.t == before.t);
    CHECK(st.s == before.s);
    CHECK(st.u == before.u);
}

TEST_CASE("run(): trace structure, sampling and termination bookkeeping") {
    const Mesh mesh = build_mesh({101, 1e-4});
    ProblemConfig cfg;
    cfg.kappa = -0.5;
    cfg.lambda = 0.0;
    cfg.t_end = 0.01;
    cfg.ic = InitialCondition::step(0.6);
    StepperParams params;
    params.dt = 1e-4;

    const RunResult rr = run(cfg, mesh, params, 1, {0.0, 0.005});
    const Trace& trace = rr.trace;
    CHECK(trace.termination.kind == Termination::ReachedTEnd);
    CHECK(trace.samples.front().t == 0.0);
    CHECK(trace.samples.back().t == doctest::Approx(0.01).epsilon(1e-12));

    for (size_t k = 1; k < trace.samples.size(); ++k) {
        CHECK(trace.samples[k].t > trace.samples[k - 1].t);
        // recorded speed equals the backward difference of the producing step
        const double dt_k = trace.samples[k].t - trace.samples[k - 1].t;
        const double expect = (trace.samples[k].s - trace.samples[k - 1].s) / dt_k;
        CHECK(trace.samples[k].dsdt == doctest::Approx(expect).epsilon(1e-9));
    }

    REQUIRE(rr.snapshots.size() == 2);
    CHECK(rr.snapshots[0].t == 0.0);
    CHECK(rr.snapshots[1].t >= 0.005);
    CHECK(rr.final_state.t == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("fast extinction run lands on the predicted boundary") {
    const Mesh mesh = build_mesh({251, 1e-6});
    ProblemConfig cfg;
    cfg.kappa = -0.75;
    cfg.lambda = 0.0;
    cfg.t_end = 4.0;
    cfg.ic = InitialCondition::step(1.0);
    StepperParams params;

    const RunResult rr = run(cfg, mesh, params, 10);
    CHECK(rr.trace.termination.kind == Termination::MassVanished);
    CHECK(std::abs(rr.trace.samples.back().s - 0.25) < 3e-2);

    const double q = superheating_Q(cfg.ic, cfg.kappa, mesh);
    CHECK(conservation_residual(rr.trace, q, cfg.kappa) < 5e-3);
}

TEST_CASE("larger initial density never leaves the boundary further out") {
    const Mesh mesh = build_mesh({251, 1e-6});
    StepperParams params;
    auto final_s = [&](double alpha) {
        ProblemConfig cfg;
        cfg.kappa = -0.25;
        cfg.lambda = 0.0;
        cfg.t_end = 6.0;
        cfg.ic = InitialCondition::step(alpha);
        return run(cfg, mesh, params, 50).trace.samples.back().s;
    };
    CHECK(final_s(0.8) < final_s(0.5));
}

TEST_CASE("a sign-broken stencil coefficient destroys conservation") {
    const Mesh mesh = build_mesh({251, 1e-6});
    ProblemConfig cfg;
    cfg.kappa = -0.5;
    cfg.lambda = 0.0;
    cfg.t_end = 1.0;
    cfg.ic = InitialCondition::step(1.0);
    StepperParams params;

    const double q = superheating_Q(cfg.ic, cfg.kappa, mesh);
    const RunResult clean = run(cfg, mesh, params, 10);
    CHECK(conservation_residual(clean.trace, q, cfg.kappa) < 5e-3);

    cfg.stencil_perturbation = 0.03;
    const RunResult broken = run(cfg, mesh, params, 10);
    CHECK(conservation_residual(broken.trace, q, cfg.kappa) > 5e-3);
}

TEST_CASE("anti-diffusive perturbation is flagged as instability") {
    const Mesh mesh = build_mesh({101, 1e-4});
    ProblemConfig cfg;
    cfg.kappa = -0.5;
    cfg.lambda = 0.0;
    cfg.t_end = 0.5;
    cfg.ic = InitialCondition::step(0.9);
    cfg.stencil_perturbation = -2.0; // flips the sign of one coefficient family
    StepperParams params;
    const RunResult rr = run(cfg, mesh, params, 1);
    const bool died = rr.trace.termination.kind == Termination::InstabilityDetected ||
                      rr.trace.termination.kind == Termination::NewtonFailed;
    CHECK(died);
}
