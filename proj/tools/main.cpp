#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fsl/acceptance.hpp"
#include "fsl/config.hpp"
#include "fsl/errors.hpp"
#include "fsl/runner.hpp"
#include "fsl/version.hpp"

namespace fs = std::filesystem;

namespace {

// --out flag wins, then the environment, then ./out
fs::path output_root(const std::string& flag_value) {
    if (!flag_value.empty()) {
        return flag_value;
    }
    if (const char* env = std::getenv("FISHER_STEFAN_OUT_ROOT")) {
        return env;
    }
    return "out";
}

std::string run_label(const fsl::RunConfig& cfg, const fs::path& config_path) {
    if (!cfg.label.empty()) {
        return cfg.label;
    }
    return config_path.stem().string();
}

int simulate_command(const std::string& config_path, const std::string& out_flag) {
    const fsl::RunConfig cfg = fsl::parse_config_file(config_path);
    if (!cfg.sweep_parameter.empty()) {
        throw fsl::ConfigError("config declares a sweep; use the sweep subcommand");
    }
    const fs::path dir = output_root(out_flag) / run_label(cfg, config_path);
    const fsl::RunOutcome outcome = fsl::run_to_directory(cfg, dir);
    std::cout << "run " << dir.string() << ": " << fsl::to_string(outcome.termination.kind)
              << ", verdict " << fsl::to_string(outcome.classification.verdict) << "\n";
    return outcome.clean() ? 0 : 2;
}

int sweep_command(const std::string& config_path, const std::string& out_flag, unsigned threads) {
    const fsl::RunConfig cfg = fsl::parse_config_file(config_path);
    if (cfg.sweep_parameter.empty()) {
        throw fsl::ConfigError("field 'sweep.parameter': missing (nothing to sweep)");
    }
    const fs::path dir = output_root(out_flag) / run_label(cfg, config_path);
    const fsl::SweepOutcome outcome = fsl::sweep_to_directory(cfg, dir, threads);
    bool all_clean = true;
    for (const fsl::SweepRow& row : outcome.rows) {
        std::cout << cfg.sweep_parameter << "=" << row.value << ": " << row.verdict << "\n";
        all_clean = all_clean && row.clean;
    }
    std::cout << "aggregate: " << outcome.aggregate_csv.string() << "\n";
    return all_clean ? 0 : 2;
}

int phaseplane_command(const std::vector<double>& c_values, double dz, const std::string& out_flag,
                       bool dump_trajectories) {
    const fs::path dir = output_root(out_flag);
    fs::create_directories(dir);
    const fs::path csv = dir / "phaseplane.csv";
    const fs::path traj_dir = dump_trajectories ? dir / "trajectories" : fs::path{};
    const auto results = fsl::phaseplane_to_csv(c_values, dz, csv, traj_dir);
    for (const fsl::WaveResult& wr : results) {
        std::printf("c=%g: V*=%.6f kappa=%.6f\n", wr.c, wr.v_star, wr.kappa);
    }
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
}

int check_command(const std::string& json_path, bool fast, double dev_perturb) {
    fsl::AcceptanceOptions opts;
    opts.fast = fast;
    opts.stencil_perturbation = dev_perturb;

    // refuse to start if the report cannot be written
    if (!json_path.empty()) {
        std::ofstream probe(json_path, std::ios::app);
        if (!probe) {
            std::cerr << "error: cannot write report to '" << json_path << "'\n";
            return 1;
        }
    }

    const auto results = fsl::run_acceptance(opts);
    bool all = true;
    for (const fsl::CriterionResult& r : results) {
        std::printf("%s criterion %2d: %s (%.1fs)\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.seconds);
        std::printf("        %s\n", r.details.c_str());
        all = all && r.pass;
    }
    if (!json_path.empty()) {
        std::ofstream out(json_path, std::ios::trunc);
        out << fsl::acceptance_report_json(results);
    }
    std::printf("%s\n", all ? "all criteria passed" : "SOME CRITERIA FAILED");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fisher-Stefan moving boundary laboratory"};
    app.set_version_flag("--version", fsl::version);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    unsigned threads = 0;

    auto* simulate = app.add_subcommand("simulate", "run one configured simulation");
    simulate->add_option("config", config_path, "flat key=value config file")->required();
    simulate->add_option("--out", out_flag, "output root (default env FISHER_STEFAN_OUT_ROOT or ./out)");

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep from a config");
    sweep->add_option("config", config_path, "config with sweep.parameter / sweep.values")->required();
    sweep->add_option("--out", out_flag, "output root");
    sweep->add_option("--threads", threads, "worker threads (default: hardware)");

    std::vector<double> c_values;
    double dz = 1e-4;
    bool dump_traj = false;
    auto* phaseplane = app.add_subcommand("phaseplane", "tabulate V* and kappa over a c grid");
    phaseplane->add_option("--c", c_values, "wave speeds (all negative)")->required()->delimiter(',');
    phaseplane->add_option("--dz", dz, "Heun step size (default 1e-4)");
    phaseplane->add_flag("--trajectories", dump_traj, "also dump per-c trajectory CSVs");
    phaseplane->add_option("--out", out_flag, "output root");

    std::string json_path;
    bool fast = false;
    double dev_perturb = 0.0;
    auto* check = app.add_subcommand("check", "run the built-in verification suite");
    check->add_option("--json", json_path, "write a machine-readable report here");
    check->add_flag("--fast", fast, "reduced-resolution variant of the long criteria");
    check->add_option("--dev-perturb-stencil", dev_perturb,
                      "fault injection: relative perturbation of a difference coefficient")
        ->group(""); // hidden: development aid

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return simulate_command(config_path, out_flag);
        }
        if (sweep->parsed()) {
            return sweep_command(config_path, out_flag, threads);
        }
        if (phaseplane->parsed()) {
            return phaseplane_command(c_values, dz, out_flag, dump_traj);
        }
        if (check->parsed()) {
            return check_command(json_path, fast, dev_perturb);
        }
    } catch (const fsl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
