#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "convflow/synth.hpp"
#include "convflow/trajectory.hpp"

using namespace convflow;

TEST_CASE("constant field gives an exact straight line") {
    SpaceTimeGrid g(9, 12, 12, 0.125);
    VectorField u(g, 1.0, 0.0);
    Trajectory traj = integrate_trajectory(u, 0.0, 2.0, 3.0);
    REQUIRE(traj.samples.size() > 2);
    for (const auto& s : traj.samples) {
        CHECK(s.x1 == Catch::Approx(2.0 + s.t).margin(1e-13));
        CHECK(s.x2 == Catch::Approx(3.0).margin(1e-13));
        CHECK(s.curvature == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("start point outside the domain is rejected") {
    SpaceTimeGrid g(4, 6, 6, 0.125);
    VectorField u(g, 1.0, 0.0);
    CHECK_THROWS_AS(integrate_trajectory(u, 0.0, -1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(integrate_trajectory(u, 10.0, 2.0, 2.0), std::invalid_argument);
}

TEST_CASE("Example-1 field trajectories are vertical lines at constant speed") {
    SpaceTimeGrid g(9, 10, 40, 0.125);
    AnalyticFlow ap;  // (0, g(x1)) with g = id
    ap.kind = AnalyticFlow::Kind::axis_parallel_x1;
    VectorField u = sample_flow(ap, g);
    double x1_0 = 4.0, x2_0 = 2.0;
    Trajectory traj = integrate_trajectory(u, 0.0, x1_0, x2_0);
    REQUIRE(traj.samples.size() > 3);
    for (const auto& s : traj.samples) {
        CHECK(s.x1 == Catch::Approx(x1_0).margin(1e-12));
        CHECK(s.x2 == Catch::Approx(x2_0 + x1_0 * s.t).margin(1e-10));
        CHECK(std::hypot(s.v1, s.v2) == Catch::Approx(x1_0).margin(1e-10));
    }
}

TEST_CASE("rotational field gives circular arcs with curvature 1/r") {
    // u = (-(x2-c), x1-c) about the grid center; u is linear so sampling is exact
    SpaceTimeGrid g(17, 17, 17, 0.125);
    AnalyticFlow rot;
    rot.kind = AnalyticFlow::Kind::rotation;
    rot.cx = 8.0;
    rot.cy = 8.0;
    VectorField u = sample_flow(rot, g);

    for (double r : {1.0, 2.0}) {
        double kappa = curvature(u, 0.5, rot.cx + r, rot.cy);
        CHECK(kappa == Catch::Approx(1.0 / r).margin(1e-10));
    }
    // at unit radius the speed is 1, so kappa = |D_u u|
    VectorField acc = convective_acceleration(u);
    double a1, a2;
    acc.sample(0.5, rot.cx + 1.0, rot.cy, a1, a2);
    CHECK(std::hypot(a1, a2) == Catch::Approx(1.0).margin(1e-10));

    // arc stays on the circle, curvature improves as the step shrinks
    double prev_err = 1e9;
    for (double step : {0.1, 0.05, 0.025}) {
        Trajectory traj = integrate_trajectory(u, 0.0, rot.cx + 2.0, rot.cy, step);
        double max_err = 0.0;
        for (const auto& s : traj.samples) {
            double r = std::hypot(s.x1 - rot.cx, s.x2 - rot.cy);
            max_err = std::max(max_err, std::abs(r - 2.0));
            if (std::isfinite(s.curvature))
                max_err = std::max(max_err, std::abs(s.curvature - 0.5));
        }
        CHECK(max_err < prev_err + 1e-12);
        prev_err = max_err;
    }
    CHECK(prev_err < 1e-6);
}

TEST_CASE("curvature is invariant under positive scaling of a steady field") {
    SpaceTimeGrid g(5, 17, 17, 0.125);
    AnalyticFlow rot;
    rot.kind = AnalyticFlow::Kind::rotation;
    rot.cx = 8.0;
    rot.cy = 8.0;
    VectorField u = sample_flow(rot, g);
    double base = curvature(u, 0.25, 10.0, 9.0);
    for (double c : {0.5, 3.0, 17.0}) {
        VectorField uc = u;
        for (auto& v : uc.u1) v *= c;
        for (auto& v : uc.u2) v *= c;
        CHECK(curvature(uc, 0.25, 10.0, 9.0) == Catch::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("curvature signals stagnation points") {
    SpaceTimeGrid g(4, 6, 6, 0.125);
    VectorField u(g);  // identically zero
    CHECK_THROWS_AS(curvature(u, 0.1, 2.0, 2.0), std::domain_error);
}

TEST_CASE("Burgers trajectories through one point at different times have different speeds") {
    SpaceTimeGrid g(17, 24, 8, 0.125);
    AnalyticFlow bf;
    bf.kind = AnalyticFlow::Kind::burgers_linear;
    bf.a = 1.0;
    VectorField u = sample_flow(bf, g);
    // two trajectories arranged to pass through x1 = 12 at t = 0 and t = 1
    Trajectory t0 = integrate_trajectory(u, 0.0, 12.0, 4.0, g.dt / 8);
    double speed0 = std::hypot(t0.samples.front().v1, t0.samples.front().v2);
    Trajectory t1 = integrate_trajectory(u, 1.0, 12.0, 4.0, g.dt / 8);
    double speed1 = std::hypot(t1.samples.front().v1, t1.samples.front().v2);
    CHECK(speed0 == Catch::Approx(12.0).margin(1e-6));
    CHECK(speed1 == Catch::Approx(6.0).margin(1e-6));
    CHECK(std::abs(speed0 - speed1) > 1.0);
}
