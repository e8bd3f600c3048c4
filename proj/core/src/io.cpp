#include "fsl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fsl/version.hpp"
#include "json.hpp"

namespace fsl {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    return out;
}

nlohmann::json termination_json(const TerminationEvent& ev, const UnitScales& sc) {
    return {
        {"kind", to_string(ev.kind)},
        {"t", ev.t * sc.time},
        {"s", ev.s * sc.length},
        {"dsdt", ev.dsdt * sc.speed()},
    };
}

} // namespace

void write_trace_csv(const std::filesystem::path& path, const Trace& trace,
                     const UnitScales& sc) {
    std::ofstream out = open_out(path);
    out << "t,s,dsdt,M\n";
    char buf[200];
    for (const TraceSample& smp : trace.samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", smp.t * sc.time,
                      smp.s * sc.length, smp.dsdt * sc.speed(), smp.mass * sc.length);
        out << buf;
    }
}

void write_profile_csv(const std::filesystem::path& path, const Mesh& mesh,
                       const ProfileSnapshot& snap, const UnitScales& sc) {
    std::ofstream out = open_out(path);
    out << "y,x,u\n";
    char buf[200];
    for (int i = 0; i < mesh.n(); ++i) {
        const double y = mesh.node(i);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", y, snap.s * y * sc.length,
                      snap.u[static_cast<size_t>(i)]);
        out << buf;
    }
}

void write_summary_json(const std::filesystem::path& path, const RunConfig& cfg,
                        const Trace& trace, const UnitScales& sc) {
    nlohmann::json j;
    j["config"] = config_to_map(cfg);
    j["termination"] = termination_json(trace.termination, sc);
    const TraceSample& last = trace.samples.back();
    j["final"] = {
        {"t", last.t * sc.time},
        {"s", last.s * sc.length},
        {"M", last.mass * sc.length},
    };
    j["newton"] = {
        {"total_steps", trace.total_steps},
        {"total_iters", trace.total_newton_iters},
        {"max_iters_per_step", trace.max_newton_iters},
        {"mean_iters_per_step",
         trace.total_steps > 0
             ? static_cast<double>(trace.total_newton_iters) / static_cast<double>(trace.total_steps)
             : 0.0},
    };
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_classification_json(const std::filesystem::path& path, const Classification& cls,
                               const UnitScales& sc, double lambda) {
    nlohmann::json j;
    j["verdict"] = to_string(cls.verdict);
    j["regime"] = {
        {"Q", cls.q},
        {"Q_sign", cls.q > 0.0 ? 1 : (cls.q < 0.0 ? -1 : 0)},
        {"lambda", lambda},
        {"lambda_tau", cls.lambda_tau},
    };
    switch (cls.verdict) {
    case Verdict::TravellingWave:
        j["speed"] = cls.speed * sc.speed();
        break;
    case Verdict::FiniteTimeBlowup:
        j["t_c"] = cls.t_c * sc.time;
        j["s_c"] = cls.s_c * sc.length;
        break;
    case Verdict::Extinction:
        j["s_e"] = cls.s_e * sc.length;
        break;
    case Verdict::CompleteMelting:
        j["t_e"] = cls.t_e * sc.time;
        break;
    case Verdict::Undetermined:
        break;
    }
    j["diagnostics"]["plateau_rel_change"] = cls.plateau_rel_change;
    if (cls.blowup) {
        j["diagnostics"]["blowup_fit"] = {
            {"speed_fit_r2", cls.blowup->speed_fit_r2},
            {"position_fit_r2", cls.blowup->position_fit_r2},
            {"window_t_lo", cls.blowup->window_t_lo * sc.time},
            {"window_t_hi", cls.blowup->window_t_hi * sc.time},
            {"n_points", cls.blowup->n_points},
        };
    }
    if (!cls.note.empty()) {
        j["note"] = cls.note;
    }
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_manifest_json(const std::filesystem::path& path, const RunConfig& cfg,
                         double wall_seconds, const std::vector<std::string>& files) {
    nlohmann::json j;
    j["tool_version"] = version;
    j["wall_seconds"] = wall_seconds;
    j["config"] = config_to_map(cfg);
    j["files"] = files;
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

} // namespace fsl
