#include "fsl/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "fsl/io.hpp"

namespace fsl {

namespace fs = std::filesystem;

namespace {

std::string snapshot_filename(size_t index, double t_report) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "profile_%03zu_t%.6g.csv", index, t_report);
    return buf;
}

} // namespace

RunOutcome run_to_directory(const RunConfig& cfg, const fs::path& dir) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(dir);

    const Mesh mesh = build_mesh(cfg.mesh);
    const ProblemConfig problem = cfg.scaled_problem();
    const StepperParams stepper = cfg.scaled_stepper();
    const UnitScales sc = cfg.scales();

    RunResult result = run(problem, mesh, stepper, cfg.sample_every, cfg.scaled_snapshot_times());
    const Classification cls = classify(result.trace, problem, mesh);

    RunOutcome outcome;
    outcome.dir = dir;
    outcome.classification = cls;
    outcome.termination = result.trace.termination;

    write_trace_csv(dir / "trace.csv", result.trace, sc);
    outcome.files.push_back("trace.csv");

    for (size_t i = 0; i < result.snapshots.size(); ++i) {
        const std::string name = snapshot_filename(i, result.snapshots[i].t * sc.time);
        write_profile_csv(dir / name, mesh, result.snapshots[i], sc);
        outcome.files.push_back(name);
    }
    {
        const ProfileSnapshot final_snap{result.final_state.t, result.final_state.s,
                                         result.final_state.u};
        write_profile_csv(dir / "profile_final.csv", mesh, final_snap, sc);
        outcome.files.push_back("profile_final.csv");
    }

    write_summary_json(dir / "summary.json", cfg, result.trace, sc);
    outcome.files.push_back("summary.json");
    write_classification_json(dir / "classification.json", cls, sc, problem.lambda);
    outcome.files.push_back("classification.json");

    {
        std::ofstream echo(dir / "config.echo.cfg");
        echo << config_to_text(cfg);
        outcome.files.push_back("config.echo.cfg");
    }

    outcome.files.push_back("manifest.json");
    outcome.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest_json(dir / "manifest.json", cfg, outcome.wall_seconds, outcome.files);
    return outcome;
}

RunConfig apply_sweep_value(const RunConfig& base, const std::string& parameter, double value) {
    RunConfig cfg = base;
    cfg.sweep_parameter.clear();
    cfg.sweep_values.clear();
    if (parameter == "kappa") {
        cfg.problem.kappa = value;
    } else if (parameter == "lambda") {
        cfg.problem.lambda = value;
    } else if (parameter == "s0") {
        cfg.s0 = value;
    } else if (parameter == "ic.alpha") {
        cfg.problem.ic.alpha = value;
    } else if (parameter == "ic.m0") {
        cfg.problem.ic.m0 = value;
    } else if (parameter == "t_end") {
        cfg.problem.t_end = value;
    } else {
        throw ConfigError("field 'sweep.parameter': cannot sweep '" + parameter + "'");
    }
    return cfg;
}

SweepOutcome sweep_to_directory(const RunConfig& base, const fs::path& dir, unsigned threads) {
    if (base.sweep_parameter.empty() || base.sweep_values.empty()) {
        throw ConfigError("field 'sweep.parameter': sweep requested without a parameter list");
    }
    // validate every point before any run starts
    std::vector<RunConfig> configs;
    for (double v : base.sweep_values) {
        RunConfig cfg = apply_sweep_value(base, base.sweep_parameter, v);
        cfg.validate();
        configs.push_back(std::move(cfg));
    }
    fs::create_directories(dir);

    SweepOutcome outcome;
    outcome.runs.resize(configs.size());

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(configs.size()));

    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::string first_error;
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= configs.size()) {
                return;
            }
            char sub[64];
            std::snprintf(sub, sizeof(sub), "%s_%.10g", base.sweep_parameter.c_str(),
                          base.sweep_values[i]);
            try {
                outcome.runs[i] = run_to_directory(configs[i], dir / sub);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error.empty()) {
                    first_error = e.what();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (!first_error.empty()) {
        throw Error("sweep run failed: " + first_error);
    }

    for (size_t i = 0; i < configs.size(); ++i) {
        const Classification& cls = outcome.runs[i].classification;
        SweepRow row;
        row.value = base.sweep_values[i];
        row.verdict = to_string(cls.verdict);
        const UnitScales sc = configs[i].scales();
        row.speed = cls.speed * sc.speed();
        row.t_c = cls.t_c * sc.time;
        row.s_c = cls.s_c * sc.length;
        row.s_e = cls.s_e * sc.length;
        row.clean = outcome.runs[i].clean();
        outcome.rows.push_back(row);
    }
    std::sort(outcome.rows.begin(), outcome.rows.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.value < b.value; });

    outcome.aggregate_csv = dir / "aggregate.csv";
    std::ofstream out(outcome.aggregate_csv);
    if (!out) {
        throw Error("cannot write '" + outcome.aggregate_csv.string() + "'");
    }
    out << base.sweep_parameter << ",verdict,speed,t_c,s_c,s_e\n";
    char buf[256];
    for (const SweepRow& row : outcome.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g,%.17g,%.17g,%.17g\n", row.value,
                      row.verdict.c_str(), row.speed, row.t_c, row.s_c, row.s_e);
        out << buf;
    }
    return outcome;
}

std::vector<WaveResult> phaseplane_to_csv(const std::vector<double>& c_grid, double dz,
                                          const fs::path& csv_path, const fs::path& traj_dir) {
    if (c_grid.empty()) {
        throw ConfigError("phaseplane: empty c grid");
    }
    PhasePlaneOptions opts;
    if (dz > 0.0) {
        opts.dz = dz;
    }

    std::vector<WaveResult> results;
    std::ofstream out(csv_path);
    if (!out) {
        throw Error("cannot write '" + csv_path.string() + "'");
    }
    out << "c,v_star,kappa,kappa_asymptotic\n";
    char buf[200];
    for (double c : c_grid) {
        const Trajectory traj = integrate_from_saddle(c, opts);
        const double v_star = find_v_star(traj);
        const WaveResult wr{c, v_star, -c / v_star};
        results.push_back(wr);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", c, v_star, wr.kappa,
                      asymptotic_kappa(c));
        out << buf;

        if (!traj_dir.empty()) {
            fs::create_directories(traj_dir);
            std::snprintf(buf, sizeof(buf), "trajectory_c%.6g.csv", c);
            std::ofstream tout(traj_dir / buf);
            if (!tout) {
                throw Error("cannot write trajectory CSV");
            }
            tout << "z,U,V\n";
            for (const TrajectorySample& smp : traj.samples) {
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", smp.z, smp.u, smp.v);
                tout << buf;
            }
        }
    }
    return results;
}

} // namespace fsl
