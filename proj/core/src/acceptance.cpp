#include "fsl/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fsl/analysis.hpp"
#include "fsl/config.hpp"
#include "fsl/phaseplane.hpp"
#include "fsl/runner.hpp"
#include "json.hpp"

namespace fsl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

struct CompletedRun {
    RunConfig cfg;
    RunResult result;
    Classification cls;
    double seconds = 0.0;
};

struct Context {
    AcceptanceOptions opts;
    std::map<std::string, CompletedRun> cache;

    const CompletedRun& execute(const std::string& key, const RunConfig& cfg_in) {
        auto it = cache.find(key);
        if (it != cache.end()) {
            return it->second;
        }
        RunConfig cfg = cfg_in;
        cfg.problem.stencil_perturbation = opts.stencil_perturbation;
        const auto t0 = Clock::now();
        const Mesh mesh = build_mesh(cfg.mesh);
        CompletedRun done;
        done.cfg = cfg;
        done.result = run(cfg.scaled_problem(), mesh, cfg.scaled_stepper(), cfg.sample_every,
                          cfg.scaled_snapshot_times());
        done.cls = classify(done.result.trace, cfg.scaled_problem(), mesh);
        done.seconds = seconds_since(t0);
        return cache.emplace(key, std::move(done)).first->second;
    }
};

// lambda = 0 superheated runs on the unit domain (figure-6 style)
RunConfig extinction_config(double kappa, double m0_step, int n_nodes) {
    RunConfig cfg;
    cfg.mesh = {n_nodes, 1e-6};
    cfg.problem.kappa = kappa;
    cfg.problem.lambda = 0.0;
    cfg.problem.ic = InitialCondition::step(m0_step);
    cfg.problem.t_end = 8.0;
    cfg.stepper.dt = 1e-4;
    cfg.sample_every = 10;
    return cfg;
}

// large initial domain runs reported in the original variables (figure-1/3 style)
RunConfig unscaled_config(double kappa, double alpha, double t_end, double speed_threshold,
                          int sample_every) {
    RunConfig cfg;
    cfg.mesh = {1001, 1e-6};
    cfg.s0 = 1000.0;
    cfg.problem.kappa = kappa;
    cfg.problem.ic = InitialCondition::step(alpha);
    cfg.problem.t_end = t_end; // unscaled
    cfg.problem.blowup_speed_threshold = speed_threshold;
    cfg.stepper.dt = 1e-4;     // unscaled
    cfg.sample_every = sample_every;
    return cfg;
}

CriterionResult criterion_mesh_constants() {
    const auto t0 = Clock::now();
    CriterionResult res{1, "mesh constants (N=1001, dy_min=1e-6)", false, "", 0.0};
    const MeshSpec spec{1001, 1e-6};
    const double r = solve_expansion_ratio(spec);
    const Mesh mesh = build_mesh(spec);
    const double dy_max = mesh.dy_max();
    // printed value 9.083e-2 is off by a factor of ten: spacings starting at
    // 1e-6 with ratio 1.009165 sum to 1 only with dy_max near 9.083e-3
    const bool ratio_ok = std::abs(r - 1.009165) < 1e-6;
    const bool dymax_ok = std::abs(dy_max - 9.083e-3) < 1e-6;
    res.pass = ratio_ok && dymax_ok;
    res.details = fmt("ratio=%.8f (target 1.009165 +- 1e-6), dy_max=%.6e (target 9.083e-3 +- 1e-6)",
                      r, dy_max);
    res.seconds = seconds_since(t0);
    return res;
}

CriterionResult criterion_phase_plane_table() {
    const auto t0 = Clock::now();
    CriterionResult res{2, "phase-plane V* and kappa table", true, "", 0.0};
    const double cs[4] = {-0.1, -1.0, -2.0, -5.0};
    const double vstar_ref[4] = {-0.643, -1.32, -2.21, -5.10};
    const double kappa_ref[4] = {-0.156, -0.753, -0.904, -0.981};
    std::string details;
    for (int i = 0; i < 4; ++i) {
        const WaveResult wr = kappa_from_c(cs[i]);
        const double v_rel = std::abs(wr.v_star - vstar_ref[i]) / std::abs(vstar_ref[i]);
        const double k_abs = std::abs(wr.kappa - kappa_ref[i]);
        if (v_rel > 0.01 || k_abs > 0.005) {
            res.pass = false;
        }
        details += fmt("c=%g: V*=%.4f (ref %.3f, rel %.2e), kappa=%.4f (ref %.3f, abs %.2e); ",
                       cs[i], wr.v_star, vstar_ref[i], v_rel, wr.kappa, kappa_ref[i], k_abs);
    }
    res.details = details;
    res.seconds = seconds_since(t0);
    return res;
}

CriterionResult criterion_kappa_asymptote() {
    const auto t0 = Clock::now();
    CriterionResult res{3, "kappa(c) large-|c| asymptote", false, "", 0.0};
    const double k5 = kappa_from_c(-5.0).kappa;
    const double k10 = kappa_from_c(-10.0).kappa;
    const double a5 = asymptotic_kappa(-5.0);
    const double a10 = asymptotic_kappa(-10.0);
    const bool ok5 = std::abs(k5 - a5) < 0.005;
    const bool ok10 = std::abs(k10 - a10) < 0.002;
    res.pass = ok5 && ok10;
    res.details = fmt("kappa(-5)=%.5f vs %.3f (|diff|=%.2e < 5e-3), kappa(-10)=%.5f vs %.4f "
                      "(|diff|=%.2e < 2e-3)",
                      k5, a5, std::abs(k5 - a5), k10, a10, std::abs(k10 - a10));
    res.seconds = seconds_since(t0);
    return res;
}

struct ExtinctionCase {
    double kappa;
    double m0;
    double expected;
};

const ExtinctionCase kExtinctionCases[6] = {
    {-0.25, 1.00, 0.75}, {-0.50, 1.00, 0.50},   {-0.75, 1.00, 0.25},
    {-0.75, 0.75, 0.4375}, {-0.75, 0.50, 0.625}, {-0.75, 0.25, 0.8125},
};

std::string extinction_key(double kappa, double m0, int n_nodes) {
    return fmt("extinction_k%g_m%g_n%d", kappa, m0, n_nodes);
}

CriterionResult criterion_extinction_positions(Context& ctx) {
    const auto t0 = Clock::now();
    CriterionResult res{4, "extinction positions (lambda=0 families)", true, "", 0.0};
    std::string details;

    if (!ctx.opts.fast) {
        for (const ExtinctionCase& ec : kExtinctionCases) {
            const CompletedRun& done =
                ctx.execute(extinction_key(ec.kappa, ec.m0, 1001),
                            extinction_config(ec.kappa, ec.m0, 1001));
            const double err = std::abs(done.cls.s_e - ec.expected);
            const bool ok = done.cls.verdict == Verdict::Extinction && err < 1e-2;
            if (!ok) {
                res.pass = false;
            }
            details += fmt("[N=1001 k=%g M0=%g] s_e=%.4f (ref %.4f, err %.1e, %s); ", ec.kappa,
                           ec.m0, done.cls.s_e, ec.expected, err, to_string(done.cls.verdict));
        }
    }
    for (const ExtinctionCase& ec : kExtinctionCases) {
        const CompletedRun& done = ctx.execute(extinction_key(ec.kappa, ec.m0, 251),
                                               extinction_config(ec.kappa, ec.m0, 251));
        const double err = std::abs(done.cls.s_e - ec.expected);
        const bool ok =
            done.cls.verdict == Verdict::Extinction && err < 3e-2 && done.seconds < 30.0;
        if (!ok) {
            res.pass = false;
        }
        details += fmt("[N=251 k=%g M0=%g] s_e=%.4f (err %.1e, %.1fs); ", ec.kappa, ec.m0,
                       done.cls.s_e, err, done.seconds);
    }
    res.details = details;
    res.seconds = seconds_since(t0);
    return res;
}

CriterionResult criterion_conservation(Context& ctx) {
    const auto t0 = Clock::now();
    CriterionResult res{5, "conservation identity on lambda=0 runs", true, "", 0.0};
    std::string details;
    const int n_nodes = ctx.opts.fast ? 251 : 1001;
    const Mesh mesh = build_mesh({n_nodes, 1e-6});
    for (const ExtinctionCase& ec : kExtinctionCases) {
        const CompletedRun& done = ctx.execute(extinction_key(ec.kappa, ec.m0, n_nodes),
                                               extinction_config(ec.kappa, ec.m0, n_nodes));
        const double q = superheating_Q(done.cfg.problem.ic, ec.kappa, mesh);
        const double residual = conservation_residual(done.result.trace, q, ec.kappa);
        if (!(residual < 5e-3)) {
            res.pass = false;
        }
        details += fmt("[k=%g M0=%g] max|s+kappa(M-Q)|=%.2e; ", ec.kappa, ec.m0, residual);
    }
    res.details = details;
    res.seconds = seconds_since(t0);
    return res;
}

CriterionResult criterion_blowup_headline(Context& ctx) {
    const auto t0 = Clock::now();
    CriterionResult res{6, "blow-up headline (kappa=-1.01, s0=1000)", false, "", 0.0};
    // threshold deep enough (200 in the original units) that the terminal
    // decade sits inside the square-root regime
    const CompletedRun& done = ctx.execute("headline", unscaled_config(-1.01, 0.5, 8.0, 2e5, 10));
    const UnitScales sc = done.cfg.scales();
    if (done.cls.verdict != Verdict::FiniteTimeBlowup) {
        res.details = fmt("verdict=%s (expected FiniteTimeBlowup)", to_string(done.cls.verdict));
        res.seconds = seconds_since(t0);
        return res;
    }
    const double t_c = done.cls.t_c * sc.time;
    const double s_c = done.cls.s_c * sc.length;
    res.pass = std::abs(t_c - 6.4) <= 0.3 && std::abs(s_c - 975.0) <= 10.0;
    res.details = fmt("t_c=%.3f (target 6.4 +- 0.3), s_c=%.2f (target 975 +- 10), run %.1fs", t_c,
                      s_c, done.seconds);
    res.seconds = seconds_since(t0);
    return res;
}

CriterionResult criterion_scaling_exponents(Context& ctx) {
    const auto t0 = Clock::now();
    CriterionResult res{7, "blow-up scaling exponents (+-1/2)", true, "", 0.0};
    std::string details;
    for (double kappa : {-1.2, -1.1, -1.05}) {
        const CompletedRun& done =
            ctx.execute(fmt("family_k%g", kappa), unscaled_config(kappa, 0.5, 8.0, 1e5, 1));
        if (done.result.trace.termination.kind != Termination::SpeedExceeded) {
            res.pass = false;
            details += fmt("[k=%g] no blow-up (%s); ", kappa,
                           to_string(done.result.trace.termination.kind));
            continue;
        }
        const BlowupEstimate est = estimate_blowup(done.result.trace);
        const ScalingFit speed = fit_loglog_slope(done.result.trace, est.t_c, FitQuantity::Speed);
        const ScalingFit pos = fit_loglog_slope(done.result.trace, est.t_c, FitQuantity::Position);
        const bool ok =
            std::abs(speed.slope + 0.5) <= 0.1 && std::abs(pos.slope - 0.5) <= 0.1;
        if (!ok) {
            res.pass = false;
        }
        details += fmt("[k=%g] speed slope=%.3f, position slope=%.3f (n=%d); ", kappa, speed.slope,
                       pos.slope, speed.n_points);
    }
    res.details = details;
    res.seconds = seconds_since(t0);
    return res;
}

double mean_terminal_speed(const Trace& trace, double window_frac) {
    const size_t n = trace.samples.size();
    const size_t w = std::max<size_t>(2, static_cast<size_t>(static_cast<double>(n) * window_frac));
    double acc = 0.0;
    size_t count = 0;
    for (size_t i = n - w; i < n; ++i) {
        acc += trace.samples[i].dsdt;
        ++count;
    }
    return acc / static_cast<double>(count);
}

CriterionResult criterion_travelling_wave(Context& ctx) {
    const auto t0 = Clock::now();
    CriterionResult res{8, "travelling-wave speed consistency", false, "", 0.0};

    const CompletedRun& steep =
        ctx.execute("tw_k0.981", unscaled_config(-0.981, 0.5, 16.0, 1e4, 10));
    const double c_pred = c_from_kappa(-0.981, 1e-4);
    const double v_steep =
        mean_terminal_speed(steep.result.trace, 0.2) * steep.cfg.scales().speed();
    const double rel_steep = std::abs(v_steep - c_pred) / std::abs(c_pred);

    const CompletedRun& slow = ctx.execute("tw_k0.05", unscaled_config(-0.05, 0.5, 12.0, 1e4, 10));
    const double c_small = -0.05 / std::sqrt(3.0);
    const double v_slow = mean_terminal_speed(slow.result.trace, 0.2) * slow.cfg.scales().speed();
    const double rel_slow = std::abs(v_slow - c_small) / std::abs(c_small);

    res.pass = rel_steep < 0.05 && rel_slow < 0.10;
    res.details =
        fmt("kappa=-0.981: speed=%.4f vs c=%.4f (rel %.3f < 0.05); kappa=-0.05: speed=%.6f vs "
            "%.6f (rel %.3f < 0.10)",
            v_steep, c_pred, rel_steep, v_slow, c_small, rel_slow);
    res.seconds = seconds_since(t0);
    return res;
}

CriterionResult criterion_lambda_ordering(Context& ctx) {
    const auto t0 = Clock::now();
    CriterionResult res{9, "lambda>0 moves the front past the lambda=0 prediction", false, "", 0.0};
    RunConfig cfg = extinction_config(-0.5, 1.0, ctx.opts.fast ? 251 : 1001);
    cfg.problem.lambda = 1.0;
    const CompletedRun& done = ctx.execute("lambda1_k0.5", cfg);
    if (done.cls.verdict != Verdict::Extinction) {
        res.details = fmt("verdict=%s (expected Extinction)", to_string(done.cls.verdict));
        res.seconds = seconds_since(t0);
        return res;
    }
    const double predicted_lambda0 = 0.5;
    res.pass = done.cls.s_e < predicted_lambda0 - 1e-2;
    res.details = fmt("measured s_e=%.4f, lambda=0 prediction %.2f, margin %.3f (> 1e-2)",
                      done.cls.s_e, predicted_lambda0, predicted_lambda0 - done.cls.s_e);
    res.seconds = seconds_since(t0);
    return res;
}

CriterionResult criterion_ramp_blowup(Context& ctx) {
    const auto t0 = Clock::now();
    CriterionResult res{10, "ramp blow-up regime (kappa=-3, lambda=1)", false, "", 0.0};
    RunConfig cfg;
    cfg.mesh = {ctx.opts.fast ? 501 : 1001, 1e-6};
    cfg.problem.kappa = -3.0;
    cfg.problem.lambda = 1.0;
    cfg.problem.ic = InitialCondition::ramp(0.5);
    cfg.problem.t_end = 0.06;
    cfg.problem.blowup_speed_threshold = 300.0;
    cfg.stepper.dt = 1e-6;
    cfg.sample_every = 5;
    const CompletedRun& done = ctx.execute("ramp_blowup", cfg);
    if (done.cls.verdict != Verdict::FiniteTimeBlowup) {
        res.details = fmt("verdict=%s (expected FiniteTimeBlowup)", to_string(done.cls.verdict));
        res.seconds = seconds_since(t0);
        return res;
    }
    const double t_c = done.cls.t_c;
    const double s_c = done.cls.s_c;
    const bool window_ok = t_c >= 0.015 && t_c <= 0.035 && s_c >= 0.5 && s_c <= 0.72;

    // profile overlay against the limiting blow-up shape
    const Mesh mesh = build_mesh(cfg.mesh);
    const State& fin = done.result.final_state;
    double sup_dev = 0.0;
    int n_compared = 0;
    for (int i = 0; i < mesh.n(); ++i) {
        const double x = fin.s * mesh.node(i);
        const double d = s_c - x;
        if (d >= 1e-4 && d <= 1e-2) {
            const double u_ref = blowup_profile(x, s_c, cfg.problem.kappa);
            sup_dev = std::max(sup_dev, std::abs(fin.u[static_cast<size_t>(i)] - u_ref));
            ++n_compared;
        }
    }
    const bool overlay_ok = n_compared > 10 && sup_dev < 0.1;

    res.pass = window_ok && overlay_ok;
    res.details = fmt("t_c=%.4f (in [0.015,0.035]), s_c=%.4f (in [0.5,0.72]), overlay sup=%.3f "
                      "over %d nodes (< 0.1)",
                      t_c, s_c, sup_dev, n_compared);
    res.seconds = seconds_since(t0);
    return res;
}

CriterionResult criterion_property_suite(Context& ctx) {
    const auto t0 = Clock::now();
    CriterionResult res{11, "property suite", true, "", 0.0};
    std::string details;

    // time-step convergence at a fixed pre-blow-up time
    {
        RunConfig cfg = extinction_config(-1.25, 1.0, ctx.opts.fast ? 251 : 1001);
        cfg.problem.t_end = 0.1;
        cfg.sample_every = 1000000; // endpoints only
        const CompletedRun& coarse = ctx.execute("dtconv_coarse", cfg);
        RunConfig cfg2 = cfg;
        cfg2.stepper.dt = 0.5e-4;
        const CompletedRun& fine = ctx.execute("dtconv_fine", cfg2);
        const double s1 = coarse.result.final_state.s;
        const double s2 = fine.result.final_state.s;
        const double rel = std::abs(s1 - s2) / std::abs(s2);
        const bool ok = rel < 1e-3;
        if (!ok) res.pass = false;
        details += fmt("dt halving: |ds|/s=%.2e (< 1e-3); ", rel);
    }

    // zero initial data is a fixed point
    {
        const Mesh mesh = build_mesh({101, 1e-4});
        ProblemConfig problem;
        problem.kappa = -0.7;
        problem.lambda = 0.0;
        problem.t_end = 1.0;
        problem.ic = InitialCondition::tabulated(std::vector<double>(101, 0.0));
        StepperParams params;
        State st = make_initial_state(mesh, problem.ic);
        Stepper stepper(mesh);
        bool ok = true;
        for (int k = 0; k < 100 && ok; ++k) {
            const auto out = stepper.advance(st, problem, params);
            ok = out.converged && st.s == 1.0;
            for (double v : st.u) {
                ok = ok && v == 0.0;
            }
        }
        if (!ok) res.pass = false;
        details += fmt("zero fixed point: %s; ", ok ? "holds bitwise" : "VIOLATED");
    }

    // discrete no-flux and Dirichlet rows hold exactly after every step
    {
        const Mesh mesh = build_mesh({201, 1e-5});
        ProblemConfig problem;
        problem.kappa = -0.5;
        problem.lambda = 1.0;
        problem.t_end = 1.0;
        problem.ic = InitialCondition::step(0.8);
        StepperParams params;
        State st = make_initial_state(mesh, problem.ic);
        Stepper stepper(mesh);
        bool ok = true;
        for (int k = 0; k < 200 && ok; ++k) {
            const auto out = stepper.advance(st, problem, params);
            ok = out.converged && st.u[0] == st.u[1] && st.u.back() == 0.0;
        }
        if (!ok) res.pass = false;
        details += fmt("boundary rows exact: %s; ", ok ? "yes" : "VIOLATED");
    }

    // Heun convergence: V* error shrinks ~4x per dz halving
    {
        PhasePlaneOptions o1;
        o1.dz = 8e-4;
        PhasePlaneOptions o2;
        o2.dz = 4e-4;
        PhasePlaneOptions o3;
        o3.dz = 2e-4;
        const double v1 = find_v_star(integrate_from_saddle(-1.0, o1));
        const double v2 = find_v_star(integrate_from_saddle(-1.0, o2));
        const double v3 = find_v_star(integrate_from_saddle(-1.0, o3));
        const double ratio = (v1 - v2) / (v2 - v3);
        const bool ok = ratio > 2.0 && ratio < 8.0;
        if (!ok) res.pass = false;
        details += fmt("Heun order ratio=%.2f (expect ~4); ", ratio);
    }

    // trace determinism: identical config, bitwise-identical trace CSV
    {
        namespace fs = std::filesystem;
        fs::path scratch = ctx.opts.scratch_dir;
        if (scratch.empty()) {
            scratch = fs::temp_directory_path() / "fisher_stefan_acceptance";
        }
        fs::remove_all(scratch);
        RunConfig cfg = extinction_config(-0.5, 1.0, 251);
        cfg.problem.t_end = 0.05;
        const RunOutcome a = run_to_directory(cfg, scratch / "a");
        const RunOutcome b = run_to_directory(cfg, scratch / "b");
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const bool ok = slurp(a.dir / "trace.csv") == slurp(b.dir / "trace.csv");
        if (!ok) res.pass = false;
        details += fmt("determinism: %s", ok ? "bitwise identical" : "DIFFERS");
        fs::remove_all(scratch);
    }

    res.details = details;
    res.seconds = seconds_since(t0);
    return res;
}

} // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
    Context ctx;
    ctx.opts = opts;
    std::vector<CriterionResult> results;
    results.push_back(criterion_mesh_constants());
    results.push_back(criterion_phase_plane_table());
    results.push_back(criterion_kappa_asymptote());
    results.push_back(criterion_extinction_positions(ctx));
    results.push_back(criterion_conservation(ctx));
    results.push_back(criterion_blowup_headline(ctx));
    results.push_back(criterion_scaling_exponents(ctx));
    results.push_back(criterion_travelling_wave(ctx));
    results.push_back(criterion_lambda_ordering(ctx));
    results.push_back(criterion_ramp_blowup(ctx));
    results.push_back(criterion_property_suite(ctx));
    return results;
}

std::string acceptance_report_json(const std::vector<CriterionResult>& results) {
    nlohmann::json j;
    j["criteria"] = nlohmann::json::array();
    bool all = true;
    for (const CriterionResult& r : results) {
        j["criteria"].push_back({
            {"id", r.id},
            {"name", r.name},
            {"pass", r.pass},
            {"details", r.details},
            {"seconds", r.seconds},
        });
        all = all && r.pass;
    }
    j["all_pass"] = all;
    return j.dump(2) + "\n";
}

} // namespace fsl
