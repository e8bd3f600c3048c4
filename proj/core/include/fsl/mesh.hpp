#pragma once

#include <vector>

#include "fsl/errors.hpp"

namespace fsl {

/// Parameters of the geometrically graded mesh on [0,1]: fine spacing dy_min
/// at y=1, spacings growing by a constant factor toward y=0.
struct MeshSpec {
    int n_nodes = 1001;
    double dy_min = 1e-6;

    /// Throws ConfigError unless n_nodes >= 3 and 0 < dy_min <= 1/(n_nodes-1).
    /// dy_min == 1/(n_nodes-1) is the uniform-mesh limit and is accepted.
    void validate() const;
};

/// Immutable graded mesh. Node 0 is pinned to 0 and node n-1 to 1 exactly;
/// interior spacings satisfy h_i = ratio * h_{i+1}.
class Mesh {
public:
    Mesh(std::vector<double> nodes, double ratio);

    int n() const { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }
    double node(int i) const { return nodes_[static_cast<size_t>(i)]; }
    double ratio() const { return ratio_; }

    /// Smallest spacing, next to y=1.
    double dy_min() const { return nodes_[nodes_.size() - 1] - nodes_[nodes_.size() - 2]; }
    /// Largest spacing, next to y=0.
    double dy_max() const { return nodes_[1] - nodes_[0]; }

private:
    std::vector<double> nodes_;
    double ratio_;
};

/// Solve dy_min * (r^{N-1} - 1) / (r - 1) = 1 for the geometric expansion
/// factor r by bisection. Returns 1 exactly in the uniform limit
/// dy_min = 1/(N-1); throws BracketError when dy_min > 1/(N-1).
double solve_expansion_ratio(const MeshSpec& spec);

/// Build the mesh: spacings accumulated from y=1 backwards, endpoints pinned,
/// interior rescaled so the spacings telescope to exactly 1.
Mesh build_mesh(const MeshSpec& spec);

} // namespace fsl
