#include "fsl/mesh.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fsl {

namespace {

// Sum of N-1 spacings starting at dy_min and expanding by r, minus 1.
// Written with expm1/log1p so it stays accurate for r -> 1.
double closure_defect(double r, int n_nodes, double dy_min) {
    const double n = static_cast<double>(n_nodes - 1);
    const double e = r - 1.0;
    const double sum = dy_min * std::expm1(n * std::log1p(e)) / e;
    return sum - 1.0;
}

} // namespace

void MeshSpec::validate() const {
    if (n_nodes < 3) {
        throw ConfigError("mesh.n_nodes must be >= 3, got " + std::to_string(n_nodes));
    }
    if (!(dy_min > 0.0)) {
        throw ConfigError("mesh.dy_min must be positive, got " + std::to_string(dy_min));
    }
    const double uniform = 1.0 / static_cast<double>(n_nodes - 1);
    if (dy_min > uniform) {
        throw ConfigError("mesh.dy_min = " + std::to_string(dy_min) +
                          " exceeds the uniform spacing 1/(n_nodes-1); no expanding mesh fits in [0,1]");
    }
}

double solve_expansion_ratio(const MeshSpec& spec) {
    spec.validate();
    const double n = static_cast<double>(spec.n_nodes - 1);
    const double at_one = n * spec.dy_min - 1.0;
    if (at_one > 0.0) {
        throw BracketError("dy_min too large: a contracting mesh would be required");
    }
    if (at_one == 0.0) {
        return 1.0; // uniform mesh
    }

    double lo = 1.0 + 1e-12;
    double hi = 2.0;
    while (closure_defect(hi, spec.n_nodes, spec.dy_min) < 0.0) {
        hi *= 2.0;
        if (hi > 1e12) {
            throw BracketError("expansion factor bracket failed to enclose a root");
        }
    }
    if (closure_defect(lo, spec.n_nodes, spec.dy_min) > 0.0) {
        // Root sits below 1+1e-12; indistinguishable from uniform.
        return 1.0;
    }

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        if (closure_defect(mid, spec.n_nodes, spec.dy_min) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Mesh::Mesh(std::vector<double> nodes, double ratio) : nodes_(std::move(nodes)), ratio_(ratio) {}

Mesh build_mesh(const MeshSpec& spec) {
    const double r = solve_expansion_ratio(spec);
    const int n = spec.n_nodes;

    // Accumulate from y=1 backwards so the fine spacings near y=1 are exact
    // and the closure defect lands on the y=0 side.
    std::vector<double> y(static_cast<size_t>(n));
    y[static_cast<size_t>(n - 1)] = 1.0;
    double h = spec.dy_min;
    for (int i = n - 2; i >= 0; --i) {
        y[static_cast<size_t>(i)] = y[static_cast<size_t>(i + 1)] - h;
        h *= r;
    }

    // Pin endpoints and rescale so spacings telescope to exactly 1.
    const double defect = y[0];
    const double scale = 1.0 / (1.0 - defect);
    for (int i = 1; i < n - 1; ++i) {
        y[static_cast<size_t>(i)] = (y[static_cast<size_t>(i)] - defect) * scale;
    }
    y[0] = 0.0;
    y[static_cast<size_t>(n - 1)] = 1.0;

    return Mesh(std::move(y), r);
}

} // namespace fsl
