#include "fsl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fsl {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0;
    size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': cannot parse '" + value + "' as a number");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': cannot parse '" + value + "' as an integer");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_double(key, item));
    }
    return out;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_full(values[i]);
    }
    return out;
}

} // namespace

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

UnitScales RunConfig::scales() const {
    if (s0 > 0.0) {
        return {s0, s0 * s0};
    }
    return {};
}

ProblemConfig RunConfig::scaled_problem() const {
    ProblemConfig p = problem;
    const UnitScales sc = scales();
    if (s0 > 0.0) {
        p.lambda = s0 * s0;
    }
    p.t_end = problem.t_end / sc.time;
    return p;
}

StepperParams RunConfig::scaled_stepper() const {
    StepperParams sp = stepper;
    sp.dt = stepper.dt / scales().time;
    return sp;
}

std::vector<double> RunConfig::scaled_snapshot_times() const {
    std::vector<double> out = snapshot_times;
    const double time = scales().time;
    for (double& t : out) {
        t /= time;
    }
    return out;
}

void RunConfig::validate() const {
    mesh.validate();
    stepper.validate();
    if (s0 < 0.0) {
        throw ConfigError("field 's0': must be positive when set");
    }
    if (sample_every < 1) {
        throw ConfigError("field 'run.sample_every': must be >= 1");
    }
    scaled_problem().validate(mesh.n_nodes);
    scaled_stepper().validate();
    if (!sweep_parameter.empty() && sweep_values.empty()) {
        throw ConfigError("field 'sweep.values': empty sweep list");
    }
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    bool lambda_set = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string tab_values; // deferred: needs mesh size

    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        }

        if (key == "kappa") {
            cfg.problem.kappa = parse_double(key, value);
        } else if (key == "lambda") {
            cfg.problem.lambda = parse_double(key, value);
            lambda_set = true;
        } else if (key == "s0") {
            cfg.s0 = parse_double(key, value);
        } else if (key == "t_end") {
            cfg.problem.t_end = parse_double(key, value);
        } else if (key == "blowup_speed_threshold") {
            cfg.problem.blowup_speed_threshold = parse_double(key, value);
        } else if (key == "ic.kind") {
            if (value == "step") {
                cfg.problem.ic.kind = ICKind::Step;
            } else if (value == "ramp") {
                cfg.problem.ic.kind = ICKind::Ramp;
            } else if (value == "tabulated") {
                cfg.problem.ic.kind = ICKind::Tabulated;
            } else {
                throw ConfigError("field 'ic.kind': expected step, ramp or tabulated, got '" +
                                  value + "'");
            }
        } else if (key == "ic.alpha") {
            cfg.problem.ic.alpha = parse_double(key, value);
        } else if (key == "ic.m0") {
            cfg.problem.ic.m0 = parse_double(key, value);
        } else if (key == "ic.values") {
            tab_values = value;
        } else if (key == "mesh.n_nodes") {
            cfg.mesh.n_nodes = static_cast<int>(parse_long(key, value));
        } else if (key == "mesh.dy_min") {
            cfg.mesh.dy_min = parse_double(key, value);
        } else if (key == "stepper.dt") {
            cfg.stepper.dt = parse_double(key, value);
        } else if (key == "stepper.newton_tol") {
            cfg.stepper.newton_tol = parse_double(key, value);
        } else if (key == "stepper.newton_max_iters") {
            cfg.stepper.newton_max_iters = static_cast<int>(parse_long(key, value));
        } else if (key == "run.sample_every") {
            cfg.sample_every = static_cast<int>(parse_long(key, value));
        } else if (key == "run.snapshot_times") {
            cfg.snapshot_times = parse_list(key, value);
        } else if (key == "run.label") {
            cfg.label = value;
        } else if (key == "sweep.parameter") {
            cfg.sweep_parameter = value;
        } else if (key == "sweep.values") {
            cfg.sweep_values = parse_list(key, value);
        } else if (key == "dev.stencil_perturb") {
            cfg.problem.stencil_perturbation = parse_double(key, value);
        } else {
            throw ConfigError("field '" + key + "': unknown key");
        }
    }

    if (!tab_values.empty()) {
        cfg.problem.ic.values = parse_list("ic.values", tab_values);
    }
    if (cfg.s0 > 0.0 && lambda_set) {
        throw ConfigError("fields 's0' and 'lambda' are exclusive; s0 implies lambda = s0^2");
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::map<std::string, std::string> config_to_map(const RunConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["kappa"] = format_full(cfg.problem.kappa);
    if (cfg.s0 > 0.0) {
        kv["s0"] = format_full(cfg.s0);
    } else {
        kv["lambda"] = format_full(cfg.problem.lambda);
    }
    kv["t_end"] = format_full(cfg.problem.t_end);
    kv["blowup_speed_threshold"] = format_full(cfg.problem.blowup_speed_threshold);
    switch (cfg.problem.ic.kind) {
    case ICKind::Step:
        kv["ic.kind"] = "step";
        kv["ic.alpha"] = format_full(cfg.problem.ic.alpha);
        break;
    case ICKind::Ramp:
        kv["ic.kind"] = "ramp";
        kv["ic.m0"] = format_full(cfg.problem.ic.m0);
        break;
    case ICKind::Tabulated:
        kv["ic.kind"] = "tabulated";
        kv["ic.values"] = join(cfg.problem.ic.values);
        break;
    }
    kv["mesh.n_nodes"] = std::to_string(cfg.mesh.n_nodes);
    kv["mesh.dy_min"] = format_full(cfg.mesh.dy_min);
    kv["stepper.dt"] = format_full(cfg.stepper.dt);
    kv["stepper.newton_tol"] = format_full(cfg.stepper.newton_tol);
    kv["stepper.newton_max_iters"] = std::to_string(cfg.stepper.newton_max_iters);
    kv["run.sample_every"] = std::to_string(cfg.sample_every);
    if (!cfg.snapshot_times.empty()) {
        kv["run.snapshot_times"] = join(cfg.snapshot_times);
    }
    if (!cfg.label.empty()) {
        kv["run.label"] = cfg.label;
    }
    if (!cfg.sweep_parameter.empty()) {
        kv["sweep.parameter"] = cfg.sweep_parameter;
        kv["sweep.values"] = join(cfg.sweep_values);
    }
    if (cfg.problem.stencil_perturbation != 0.0) {
        kv["dev.stencil_perturb"] = format_full(cfg.problem.stencil_perturbation);
    }
    return kv;
}

std::string config_to_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& [key, value] : config_to_map(cfg)) {
        out += key + " = " + value + "\n";
    }
    return out;
}

} // namespace fsl
