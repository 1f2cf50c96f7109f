#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "convflow/field_ops.hpp"
#include "convflow/grid.hpp"

namespace convflow {

struct TrajectorySample {
    double t;
    double x1, x2;
    double v1, v2;
    double a1, a2;     // interpolated convective acceleration
    double curvature;  // NaN at stagnation points
};

/// One integral curve of a velocity field. Times strictly increase;
/// integration stops at the end of the time interval or on boundary exit.
struct Trajectory {
    double t0, x1_0, x2_0;
    std::vector<TrajectorySample> samples;
};

/// Trajectory curvature kappa = u_perp . D_u u / |u|^3 with u_perp = (-u2, u1).
/// Throws when the speed is below eps_speed (stagnation point, curvature
/// undefined).
inline double curvature(const VectorField& u, const VectorField& acc, double t,
                        double x1, double x2, double eps_speed = 1e-6) {
    double v1, v2, a1, a2;
    u.sample(t, x1, x2, v1, v2);
    acc.sample(t, x1, x2, a1, a2);
    double speed = std::hypot(v1, v2);
    if (speed <= eps_speed)
        throw std::domain_error("curvature: stagnation point, curvature undefined");
    return (-v2 * a1 + v1 * a2) / (speed * speed * speed);
}

inline double curvature(const VectorField& u, double t, double x1, double x2,
                        double eps_speed = 1e-6) {
    return curvature(u, convective_acceleration(u), t, x1, x2, eps_speed);
}

/// Classical 4th-order one-step integration of gamma' = u(t, gamma) with
/// trilinear space-time interpolation of u. Default step is dt/4.
inline Trajectory integrate_trajectory(const VectorField& u, double t0, double x1_0,
                                       double x2_0, double step = -1.0,
                                       double eps_speed = 1e-6) {
    const SpaceTimeGrid& g = u.grid;
    if (step <= 0.0) step = g.dt / 4.0;
    if (t0 < 0.0 || t0 > g.duration() || x1_0 < 0.0 || x1_0 > g.extent_x1() ||
        x2_0 < 0.0 || x2_0 > g.extent_x2())
        throw std::invalid_argument("integrate_trajectory: start point outside domain");

    VectorField acc = convective_acceleration(u);
    Trajectory traj;
    traj.t0 = t0;
    traj.x1_0 = x1_0;
    traj.x2_0 = x2_0;

    auto inside = [&](double x1, double x2) {
        return x1 >= 0.0 && x1 <= g.extent_x1() && x2 >= 0.0 && x2 <= g.extent_x2();
    };
    auto record = [&](double t, double x1, double x2) {
        TrajectorySample s;
        s.t = t;
        s.x1 = x1;
        s.x2 = x2;
        u.sample(t, x1, x2, s.v1, s.v2);
        acc.sample(t, x1, x2, s.a1, s.a2);
        double speed = std::hypot(s.v1, s.v2);
        s.curvature = speed > eps_speed
                          ? (-s.v2 * s.a1 + s.v1 * s.a2) / (speed * speed * speed)
                          : std::nan("");
        traj.samples.push_back(s);
    };

    double t = t0, x1 = x1_0, x2 = x2_0;
    record(t, x1, x2);
    const double t_end = g.duration();
    while (t < t_end - 1e-14) {
        double h = std::min(step, t_end - t);
        double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
        u.sample(t, x1, x2, k1a, k1b);
        u.sample(t + 0.5 * h, x1 + 0.5 * h * k1a, x2 + 0.5 * h * k1b, k2a, k2b);
        u.sample(t + 0.5 * h, x1 + 0.5 * h * k2a, x2 + 0.5 * h * k2b, k3a, k3b);
        u.sample(t + h, x1 + h * k3a, x2 + h * k3b, k4a, k4b);
        x1 += h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
        x2 += h / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
        t += h;
        if (!inside(x1, x2)) break;  // boundary exit
        record(t, x1, x2);
    }
    return traj;
}

}  // namespace convflow
