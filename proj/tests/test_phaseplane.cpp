#include <cmath>
#include <vector>

#include "doctest.h"
#include "fsl/phaseplane.hpp"

using namespace fsl;

namespace {

// Classical-orientation integrator for speed c_hat > 0, traced backwards from
// the saddle along its stable direction (independent of the library path).
std::vector<double> classical_backward_w_profile(double c_hat, double dz, double offset,
                                                 size_t max_steps) {
    const double mu_s = (-c_hat - std::sqrt(c_hat * c_hat + 4.0)) / 2.0;
    const double norm = std::sqrt(1.0 + mu_s * mu_s);
    double u = 1.0 - offset / norm;
    double w = -offset * mu_s / norm; // first quadrant: W > 0
    std::vector<double> ws{w};
    auto f = [&](double uu, double ww, double& du, double& dw) {
        // backward sense of U' = W, W' = -c_hat W - U(1-U)
        du = -ww;
        dw = c_hat * ww + uu * (1.0 - uu);
    };
    for (size_t k = 0; k < max_steps && u > 0.0; ++k) {
        double du1, dw1, du2, dw2;
        f(u, w, du1, dw1);
        f(u + dz * du1, w + dz * dw1, du2, dw2);
        u += 0.5 * dz * (du1 + du2);
        w += 0.5 * dz * (dw1 + dw2);
        ws.push_back(w);
    }
    return ws;
}

} // namespace

TEST_CASE("reference V-axis crossings and kappa values") {
    struct Row {
        double c, v_star, v_tol, kappa;
    };
    const Row rows[] = {
        {-0.1, -0.643, 0.005, -0.156},
        {-1.0, -1.32, 0.01, -0.753},
        {-2.0, -2.21, 0.01, -0.904},
        {-5.0, -5.10, 0.02, -0.981},
    };
    for (const Row& row : rows) {
        CAPTURE(row.c);
        const WaveResult wr = kappa_from_c(row.c);
        CHECK(std::abs(wr.v_star - row.v_star) < row.v_tol);
        CHECK(std::abs(wr.kappa - row.kappa) < 0.002);
        CHECK(wr.v_star < 0.0);
        CHECK(wr.kappa > -1.0);
        CHECK(wr.kappa < 0.0);
    }
}

TEST_CASE("trajectory stays in the fourth quadrant and is monotone in U") {
    const Trajectory traj = integrate_from_saddle(-2.0);
    REQUIRE(traj.crossed);
    for (size_t k = 1; k < traj.samples.size(); ++k) {
        CHECK(traj.samples[k].u < traj.samples[k - 1].u);
        CHECK(traj.samples[k].v <= 0.0);
        CHECK(traj.samples[k].z < traj.samples[k - 1].z);
    }
}

TEST_CASE("fast waves approach the straight line through the saddle") {
    const double c = -50.0;
    const Trajectory traj = integrate_from_saddle(c);
    REQUIRE(traj.crossed);
    // slope dV/dU along the midsection approaches -c
    const auto at_u = [&](double target) {
        for (size_t k = 1; k < traj.samples.size(); ++k) {
            if (traj.samples[k].u <= target) return traj.samples[k];
        }
        return traj.samples.back();
    };
    const TrajectorySample a = at_u(0.7);
    const TrajectorySample b = at_u(0.3);
    const double slope = (b.v - a.v) / (b.u - a.u);
    CHECK(slope == doctest::Approx(-c).epsilon(0.02));
    CHECK(find_v_star(traj) == doctest::Approx(c).epsilon(0.01));
}

TEST_CASE("launch-offset insensitivity") {
    PhasePlaneOptions a;
    a.launch_offset = 1e-6;
    PhasePlaneOptions b;
    b.launch_offset = 5e-7;
    const double va = find_v_star(integrate_from_saddle(-1.0, a));
    const double vb = find_v_star(integrate_from_saddle(-1.0, b));
    CHECK(std::abs(va - vb) < 1e-6);
}

TEST_CASE("V* agrees with a ten-times-finer integration") {
    PhasePlaneOptions coarse;
    coarse.dz = 1e-4;
    PhasePlaneOptions fine;
    fine.dz = 1e-5;
    const double vc = find_v_star(integrate_from_saddle(-0.5, coarse));
    const double vf = find_v_star(integrate_from_saddle(-0.5, fine));
    CHECK(std::abs(vc - vf) < 1e-4);
}

TEST_CASE("Heun halving shrinks the V* error about fourfold") {
    PhasePlaneOptions o1, o2, o3;
    o1.dz = 8e-4;
    o2.dz = 4e-4;
    o3.dz = 2e-4;
    const double v1 = find_v_star(integrate_from_saddle(-1.0, o1));
    const double v2 = find_v_star(integrate_from_saddle(-1.0, o2));
    const double v3 = find_v_star(integrate_from_saddle(-1.0, o3));
    const double ratio = (v1 - v2) / (v2 - v3);
    CHECK(ratio > 2.5);
    CHECK(ratio < 6.0);
}

TEST_CASE("kappa map brackets and inverts") {
    SUBCASE("kappa stays inside (-1,0) and decreases along the sample grid") {
        double prev = 0.0;
        for (double c : {-0.1, -0.5, -1.0, -2.0, -5.0, -20.0}) {
            const double k = kappa_from_c(c).kappa;
            CHECK(k > -1.0);
            CHECK(k < 0.0);
            CHECK(k < prev);
            prev = k;
        }
    }
    SUBCASE("inverse map reproduces the reference speeds") {
        CHECK(std::abs(c_from_kappa(-0.156, 1e-4) - (-0.1)) < 0.005);
        CHECK(std::abs(c_from_kappa(-0.981, 1e-4) - (-5.0)) < 0.1);
    }
    SUBCASE("round trip at kappa = -0.5") {
        const double c = c_from_kappa(-0.5, 1e-6);
        CHECK(kappa_from_c(c).kappa == doctest::Approx(-0.5).epsilon(1e-5));
    }
    SUBCASE("asymptotic agreement at large |c|") {
        CHECK(std::abs(kappa_from_c(-50.0).kappa - asymptotic_kappa(-50.0)) < 2e-4);
    }
}

TEST_CASE("asymptotic closed forms") {
    CHECK(asymptotic_kappa(-1.0) == doctest::Approx(-0.5));
    CHECK(asymptotic_kappa(-5.0) == doctest::Approx(-0.98));
    CHECK(asymptotic_kappa(-10.0) == doctest::Approx(-0.995));

    // front value is exactly zero for every speed
    CHECK(asymptotic_profile(-3.0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    // independent evaluation of the three-term formula at c=-5, z=-0.2
    const double c = -5.0, z = -0.2;
    const double e = std::exp(-c * z);
    const double by_hand = 1.0 - e + e * (2.0 * c * z - 1.0 + e) / (2.0 * c * c);
    CHECK(asymptotic_profile(c, z) == doctest::Approx(by_hand).epsilon(1e-15));
}

TEST_CASE("large-|c| profile matches the integrated trajectory") {
    const double c = -20.0;
    const Trajectory traj = integrate_from_saddle(c);
    REQUIRE(traj.crossed);
    const double z_cross = traj.samples.back().z;
    double worst = 0.0;
    for (const TrajectorySample& smp : traj.samples) {
        const double z_hat = z_cross - smp.z; // front at 0, tail negative
        if (z_hat >= -0.3 && z_hat <= 0.0) {
            worst = std::max(worst, std::abs(smp.u - asymptotic_profile(c, z_hat)));
        }
    }
    CHECK(worst < 0.02);
}

TEST_CASE("mirror image of the classical orientation across the U-axis") {
    const double c = -2.0;
    PhasePlaneOptions opts;
    const Trajectory traj = integrate_from_saddle(c, opts);
    const std::vector<double> ws =
        classical_backward_w_profile(-c, opts.dz, opts.launch_offset, traj.samples.size());
    REQUIRE(ws.size() >= traj.samples.size());
    for (size_t k = 0; k < traj.samples.size(); ++k) {
        CHECK(std::abs(-traj.samples[k].v - ws[k]) < 1e-12);
    }
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(integrate_from_saddle(0.5), ConfigError);
    PhasePlaneOptions bad;
    bad.dz = 1e-2;
    CHECK_THROWS_AS(integrate_from_saddle(-1.0, bad), ConfigError);
    PhasePlaneOptions tiny_cap;
    tiny_cap.max_steps = 100;
    CHECK_THROWS_AS(integrate_from_saddle(-0.1, tiny_cap), NoCrossingError);
    CHECK_THROWS_AS(c_from_kappa(0.5, 1e-4), ConfigError);
    CHECK_THROWS_AS(c_from_kappa(-1.5, 1e-4), ConfigError);
}
