#include "fsl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fsl {

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy > 0.0) {
        const double ss_res = syy - fit.slope * sxy;
        fit.r_squared = std::max(0.0, 1.0 - ss_res / syy);
    }
    return fit;
}

// The last decade of speeds as a contiguous suffix: walking back from the
// final sample while |ds/dt| >= max/10. Plain thresholding would also pick up
// the early transient of rough initial data, which has speeds of the same
// order at the wrong end of the trace.
std::vector<size_t> terminal_window(const Trace& trace) {
    double vmax = 0.0;
    for (size_t i = 1; i < trace.samples.size(); ++i) {
        vmax = std::max(vmax, std::abs(trace.samples[i].dsdt));
    }
    size_t begin = trace.samples.size();
    while (begin > 1 && std::abs(trace.samples[begin - 1].dsdt) >= 0.1 * vmax) {
        --begin;
    }
    std::vector<size_t> idx;
    for (size_t i = begin; i < trace.samples.size(); ++i) {
        idx.push_back(i);
    }
    return idx;
}

// Blow-up extrapolation from a given window of samples.
BlowupEstimate blowup_from_window(const Trace& trace, const std::vector<size_t>& idx) {
    std::vector<double> ts, inv_v2, ss;
    ts.reserve(idx.size());
    inv_v2.reserve(idx.size());
    ss.reserve(idx.size());
    for (size_t i : idx) {
        const TraceSample& smp = trace.samples[i];
        ts.push_back(smp.t);
        inv_v2.push_back(1.0 / (smp.dsdt * smp.dsdt));
        ss.push_back(smp.s);
    }

    const LineFit speed_fit = least_squares(ts, inv_v2);
    if (!(speed_fit.slope < 0.0)) {
        throw InsufficientDataError("speed^-2 is not decreasing; no blow-up asymptote visible");
    }
    // Extend the fitted line from the final sample rather than using the
    // intercept root: the weak logarithmic drift bends speed^-2 enough that
    // the raw root can land inside the sampled range, and this form stays
    // exact for pure square-root dynamics.
    const double t_c = ts.back() + inv_v2.back() / (-speed_fit.slope);
    if (!(t_c > ts.back())) {
        throw InsufficientDataError("extrapolated t_c does not exceed the sampled times");
    }

    std::vector<double> root_tau(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) {
        root_tau[i] = std::sqrt(t_c - ts[i]);
    }
    const LineFit pos_fit = least_squares(root_tau, ss);

    BlowupEstimate est;
    est.t_c = t_c;
    est.s_c = pos_fit.intercept;
    est.speed_fit_r2 = speed_fit.r_squared;
    est.position_fit_r2 = pos_fit.r_squared;
    est.window_t_lo = ts.front();
    est.window_t_hi = ts.back();
    est.n_points = static_cast<int>(ts.size());
    return est;
}

} // namespace

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::TravellingWave: return "TravellingWave";
    case Verdict::FiniteTimeBlowup: return "FiniteTimeBlowup";
    case Verdict::Extinction: return "Extinction";
    case Verdict::CompleteMelting: return "CompleteMelting";
    case Verdict::Undetermined: return "Undetermined";
    }
    return "Unknown";
}

double superheating_Q(const InitialCondition& ic, double kappa, const Mesh& mesh) {
    if (kappa == 0.0) {
        throw ConfigError("kappa must be nonzero");
    }
    return ic.integral(mesh) + 1.0 / kappa;
}

double predict_extinction_boundary(const InitialCondition& ic, double kappa, const Mesh& mesh) {
    const double q = superheating_Q(ic, kappa, mesh);
    if (q >= 0.0) {
        throw RegimeError("Q = " + std::to_string(q) +
                          " is not negative; the run blows up instead of going extinct");
    }
    return kappa * q;
}

double skellam_extinction_estimate(const Trace& trace, const InitialCondition& ic, double kappa,
                                   double lambda, const Mesh& mesh) {
    if (trace.termination.kind != Termination::MassVanished) {
        throw RegimeError("extinction estimate requires a MassVanished trace, got " +
                          std::string(to_string(trace.termination.kind)));
    }
    const double q = superheating_Q(ic, kappa, mesh);
    double integral = 0.0;
    for (size_t i = 0; i + 1 < trace.samples.size(); ++i) {
        const TraceSample& a = trace.samples[i];
        const TraceSample& b = trace.samples[i + 1];
        integral += 0.5 * (b.t - a.t) * (a.mass + b.mass);
    }
    return kappa * (q + lambda * integral);
}

double conservation_residual(const Trace& trace, double q, double kappa) {
    double worst = 0.0;
    for (const TraceSample& smp : trace.samples) {
        worst = std::max(worst, std::abs(smp.s + kappa * (smp.mass - q)));
    }
    return worst;
}

BlowupEstimate estimate_blowup(const Trace& trace) {
    if (trace.termination.kind != Termination::SpeedExceeded) {
        throw RegimeError("blow-up extrapolation requires a SpeedExceeded trace, got " +
                          std::string(to_string(trace.termination.kind)));
    }
    const std::vector<size_t> idx = terminal_window(trace);
    if (idx.size() < 20) {
        throw InsufficientDataError("need >= 20 samples in the terminal speed window, have " +
                                    std::to_string(idx.size()));
    }
    return blowup_from_window(trace, idx);
}

ScalingFit fit_loglog_slope(const Trace& trace, double t_c, FitQuantity quantity) {
    for (const TraceSample& smp : trace.samples) {
        if (smp.t >= t_c) {
            throw ConfigError("t_c must exceed every sampled time");
        }
    }
    const std::vector<size_t> idx = terminal_window(trace);
    if (idx.size() < 10) {
        throw InsufficientDataError("need >= 10 samples in the fit window, have " +
                                    std::to_string(idx.size()));
    }

    double s_c = 0.0;
    if (quantity == FitQuantity::Position) {
        // same extrapolation as estimate_blowup, with the caller's t_c
        std::vector<double> root_tau, ss;
        for (size_t i : idx) {
            root_tau.push_back(std::sqrt(t_c - trace.samples[i].t));
            ss.push_back(trace.samples[i].s);
        }
        s_c = least_squares(root_tau, ss).intercept;
    }

    std::vector<double> lx, ly;
    for (size_t i : idx) {
        const TraceSample& smp = trace.samples[i];
        const double value = quantity == FitQuantity::Speed ? -smp.dsdt : smp.s - s_c;
        if (!(value > 0.0)) {
            continue;
        }
        lx.push_back(std::log(t_c - smp.t));
        ly.push_back(std::log(value));
    }
    if (lx.size() < 10) {
        throw InsufficientDataError("too few usable samples in the log-log window");
    }
    const LineFit fit = least_squares(lx, ly);

    ScalingFit out;
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.t_lo = trace.samples[idx.front()].t;
    out.t_hi = trace.samples[idx.back()].t;
    out.r_squared = fit.r_squared;
    out.n_points = static_cast<int>(lx.size());
    return out;
}

double blowup_scaling_law(double t, double t_c, double s_c) {
    const double tau = t_c - t;
    if (!(tau > 0.0) || !(tau < std::exp(-1.0))) {
        throw ConfigError("blow-up scaling law needs 0 < t_c - t < 1/e");
    }
    return s_c + 2.0 * std::sqrt(tau) * std::sqrt(std::log(-std::log(tau)));
}

double blowup_profile(double x, double s_c, double kappa) {
    const double d = s_c - x;
    if (!(d > 0.0) || !(d < std::exp(-1.0))) {
        throw ConfigError("blow-up profile needs 0 < s_c - x < 1/e");
    }
    return -(1.0 / kappa) * (1.0 + 1.0 / (2.0 * std::log(-std::log(d))));
}

double near_blowup_wave_profile(double x, double s, double s_dot) {
    if (!(s_dot < 0.0)) {
        throw ConfigError("near-blow-up profile needs a retreating interface (s_dot < 0)");
    }
    return 1.0 - std::exp(-s_dot * (x - s));
}

Classification classify(const Trace& trace, const ProblemConfig& cfg, const Mesh& mesh,
                        const ClassifyOptions& opts) {
    Classification cls;
    try {
        cls.q = superheating_Q(cfg.ic, cfg.kappa, mesh);
    } catch (const Error&) {
        cls.q = std::numeric_limits<double>::quiet_NaN();
    }

    switch (trace.termination.kind) {
    case Termination::SpeedExceeded: {
        try {
            const BlowupEstimate est = estimate_blowup(trace);
            cls.verdict = Verdict::FiniteTimeBlowup;
            cls.t_c = est.t_c;
            cls.s_c = est.s_c;
            cls.blowup = est;
            cls.lambda_tau = cfg.lambda * (est.t_c - trace.samples.back().t);
        } catch (const Error& err) {
            cls.verdict = Verdict::Undetermined;
            cls.note = std::string("speed threshold hit but extrapolation failed: ") + err.what();
        }
        return cls;
    }
    case Termination::MassVanished:
        cls.verdict = Verdict::Extinction;
        cls.s_e = trace.samples.back().s;
        return cls;
    case Termination::InterfaceHitOrigin:
        cls.verdict = Verdict::CompleteMelting;
        cls.t_e = trace.termination.t;
        return cls;
    case Termination::ReachedTEnd: {
        // plateau test on the final stretch of speed samples
        const size_t n = trace.samples.size();
        const size_t w = std::max<size_t>(2, static_cast<size_t>(
                                                 static_cast<double>(n) * opts.plateau_window_frac));
        if (n < 3 || w < 2) {
            cls.verdict = Verdict::Undetermined;
            cls.note = "trace too short for a plateau test";
            return cls;
        }
        double vmin = std::numeric_limits<double>::infinity();
        double vmax = -std::numeric_limits<double>::infinity();
        double vsum = 0.0;
        size_t count = 0;
        for (size_t i = n - w; i < n; ++i) {
            const double v = trace.samples[i].dsdt;
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
            vsum += v;
            ++count;
        }
        const double vref = std::abs(trace.samples.back().dsdt);
        cls.plateau_rel_change = vref > 0.0 ? (vmax - vmin) / vref
                                            : std::numeric_limits<double>::infinity();
        if (cls.plateau_rel_change < opts.plateau_tol) {
            cls.verdict = Verdict::TravellingWave;
            cls.speed = vsum / static_cast<double>(count);
        } else {
            cls.verdict = Verdict::Undetermined;
            cls.note = "reached t_end without a speed plateau";
        }
        return cls;
    }
    case Termination::NewtonFailed:
        cls.verdict = Verdict::Undetermined;
        cls.note = "solver stopped: Newton iteration failed";
        return cls;
    case Termination::InstabilityDetected:
        cls.verdict = Verdict::Undetermined;
        cls.note = "solver stopped: solution left [-0.05, 1.05]";
        return cls;
    }
    return cls;
}

} // namespace fsl
