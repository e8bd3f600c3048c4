#include <cmath>
#include <vector>

#include "doctest.h"
#include "fsl/mesh.hpp"

using namespace fsl;

namespace {

// Independent root finder for the ratio: plain bisection on the spacing sum
// evaluated by direct accumulation (no closed form shared with the library).
double ratio_by_direct_bisection(int n_nodes, double dy_min) {
    auto spacing_sum = [&](double r) {
        double h = dy_min;
        double total = 0.0;
        for (int i = 0; i < n_nodes - 1; ++i) {
            total += h;
            h *= r;
        }
        return total;
    };
    double lo = 1.0 + 1e-12, hi = 2.0;
    while (spacing_sum(hi) < 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (spacing_sum(mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("reference mesh constants at N=1001, dy_min=1e-6") {
    const MeshSpec spec{1001, 1e-6};
    const double r = solve_expansion_ratio(spec);
    CHECK(r == doctest::Approx(1.009165).epsilon(1e-6));

    const Mesh mesh = build_mesh(spec);
    // the printed reference carries a decimal-exponent slip; spacings that
    // start at 1e-6 and sum to 1 force dy_max near 9.083e-3
    CHECK(std::abs(mesh.dy_max() - 9.083e-3) < 1e-6);
    CHECK(mesh.dy_min() == doctest::Approx(1e-6).epsilon(1e-9));
}

TEST_CASE("uniform-limit spec returns ratio 1 and even spacings") {
    const MeshSpec spec{11, 0.1};
    CHECK(solve_expansion_ratio(spec) == 1.0);
    const Mesh mesh = build_mesh(spec);
    for (int i = 0; i < 11; ++i) {
        CHECK(mesh.node(i) == doctest::Approx(0.1 * i).epsilon(1e-14));
    }
}

TEST_CASE("three-node closed form: ratio 3, nodes {0, 0.75, 1}") {
    const MeshSpec spec{3, 0.25};
    CHECK(solve_expansion_ratio(spec) == doctest::Approx(3.0).epsilon(1e-12));
    const Mesh mesh = build_mesh(spec);
    CHECK(mesh.node(0) == 0.0);
    CHECK(mesh.node(1) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(mesh.node(2) == 1.0);
}

TEST_CASE("ratio agrees with an independent bisection oracle") {
    const MeshSpec spec{101, 1e-4};
    const double r = solve_expansion_ratio(spec);
    const double r_oracle = ratio_by_direct_bisection(101, 1e-4);
    CHECK(std::abs(r - r_oracle) < 1e-10);
}

TEST_CASE("mesh invariants across a range of specs") {
    for (const MeshSpec spec : {MeshSpec{3, 0.25}, MeshSpec{51, 1e-3}, MeshSpec{251, 1e-6},
                                MeshSpec{1001, 1e-6}}) {
        CAPTURE(spec.n_nodes);
        const Mesh mesh = build_mesh(spec);
        const int n = mesh.n();

        // endpoints pinned bitwise
        CHECK(mesh.node(0) == 0.0);
        CHECK(mesh.node(n - 1) == 1.0);

        // strictly increasing; spacings telescope to exactly 1
        double sum = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            CHECK(mesh.node(i) < mesh.node(i + 1));
            sum += mesh.node(i + 1) - mesh.node(i);
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);

        // re-measuring spacings recovers the stored ratio
        const double r = mesh.ratio();
        for (int i = 0; i + 2 < n; ++i) {
            const double h_left = mesh.node(i + 1) - mesh.node(i);
            const double h_right = mesh.node(i + 2) - mesh.node(i + 1);
            CHECK(h_left == doctest::Approx(r * h_right).epsilon(1e-10));
        }
    }
}

TEST_CASE("refining N at fixed dy_min shrinks dy_max") {
    const Mesh coarse = build_mesh({501, 1e-6});
    const Mesh fine = build_mesh({1001, 1e-6});
    const Mesh finer = build_mesh({2001, 1e-6});
    CHECK(fine.dy_max() < coarse.dy_max());
    CHECK(finer.dy_max() < fine.dy_max());
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(build_mesh({2, 0.1}), ConfigError);
    CHECK_THROWS_AS(build_mesh({11, 0.0}), ConfigError);
    CHECK_THROWS_AS(build_mesh({11, -0.1}), ConfigError);
    // dy_min beyond the uniform spacing: no expanding mesh fits
    CHECK_THROWS_AS(build_mesh({11, 0.2}), ConfigError);
}
