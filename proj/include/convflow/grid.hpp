#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace convflow {

/// Regular space-time node lattice (T frames, H rows, W columns).
///
/// Node (k,i,j) sits at the physical coordinate (k*dt, i*hx, j*hy).
/// Flat index is row-major: (k*H + i)*W + j. Spatial spacing defaults to one
/// pixel; dt defaults to 1/8 of a frame so that time is resolved more finely
/// than space.
struct SpaceTimeGrid {
    int frames = 0;
    int height = 0;
    int width = 0;
    double dt = 0.125;
    double hx = 1.0;
    double hy = 1.0;

    SpaceTimeGrid() = default;
    SpaceTimeGrid(int frames_, int height_, int width_, double dt_ = 0.125,
                  double hx_ = 1.0, double hy_ = 1.0)
        : frames(frames_), height(height_), width(width_), dt(dt_), hx(hx_), hy(hy_) {
        if (frames < 2 || height < 2 || width < 2)
            throw std::invalid_argument("SpaceTimeGrid: need at least 2 nodes per axis");
        if (!(dt > 0.0) || !(hx > 0.0) || !(hy > 0.0))
            throw std::invalid_argument("SpaceTimeGrid: spacings must be positive");
    }

    std::size_t nodes() const {
        return static_cast<std::size_t>(frames) * height * width;
    }
    std::size_t index(int k, int i, int j) const {
        return (static_cast<std::size_t>(k) * height + i) * width + j;
    }
    double t_of(int k) const { return k * dt; }
    double x1_of(int i) const { return i * hx; }
    double x2_of(int j) const { return j * hy; }
    double duration() const { return (frames - 1) * dt; }
    double extent_x1() const { return (height - 1) * hx; }
    double extent_x2() const { return (width - 1) * hy; }
    /// |E| = duration * spatial area.
    double volume() const { return duration() * extent_x1() * extent_x2(); }

    bool operator==(const SpaceTimeGrid& o) const {
        return frames == o.frames && height == o.height && width == o.width &&
               dt == o.dt && hx == o.hx && hy == o.hy;
    }
    bool operator!=(const SpaceTimeGrid& o) const { return !(*this == o); }
};

namespace detail {
inline void check_same_grid(const SpaceTimeGrid& a, const SpaceTimeGrid& b,
                            const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}
}  // namespace detail

/// Nodal values of a trilinear finite element function on a grid.
struct ScalarField {
    SpaceTimeGrid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const SpaceTimeGrid& g, double fill = 0.0)
        : grid(g), values(g.nodes(), fill) {}

    double& operator()(int k, int i, int j) { return values[grid.index(k, i, j)]; }
    double operator()(int k, int i, int j) const { return values[grid.index(k, i, j)]; }

    /// Trilinear interpolation at a physical point, clamped to the domain.
    double sample(double t, double x1, double x2) const;
};

/// Two-component nodal vector field (u1 along x1/rows, u2 along x2/columns).
/// Component values are velocities in the grid's physical units: pixels per
/// unit of the time coordinate t = k*dt.
struct VectorField {
    SpaceTimeGrid grid;
    std::vector<double> u1, u2;

    VectorField() = default;
    explicit VectorField(const SpaceTimeGrid& g, double f1 = 0.0, double f2 = 0.0)
        : grid(g), u1(g.nodes(), f1), u2(g.nodes(), f2) {}

    void sample(double t, double x1, double x2, double& v1, double& v2) const;
};

namespace detail {

struct ClampedCell {
    int k0, i0, j0;      // lower node of the containing cell
    double wt, wi, wj;   // fractional coordinates in [0,1]
};

inline ClampedCell locate(const SpaceTimeGrid& g, double t, double x1, double x2) {
    auto clampf = [](double s, double lo, double hi) {
        return s < lo ? lo : (s > hi ? hi : s);
    };
    double gt = clampf(t / g.dt, 0.0, g.frames - 1.0);
    double gi = clampf(x1 / g.hx, 0.0, g.height - 1.0);
    double gj = clampf(x2 / g.hy, 0.0, g.width - 1.0);
    ClampedCell c;
    c.k0 = std::min(static_cast<int>(gt), g.frames - 2);
    c.i0 = std::min(static_cast<int>(gi), g.height - 2);
    c.j0 = std::min(static_cast<int>(gj), g.width - 2);
    c.wt = gt - c.k0;
    c.wi = gi - c.i0;
    c.wj = gj - c.j0;
    return c;
}

inline double trilerp(const SpaceTimeGrid& g, const std::vector<double>& v,
                      const ClampedCell& c) {
    double acc = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d) {
                double w = (a ? c.wt : 1.0 - c.wt) * (b ? c.wi : 1.0 - c.wi) *
                           (d ? c.wj : 1.0 - c.wj);
                acc += w * v[g.index(c.k0 + a, c.i0 + b, c.j0 + d)];
            }
    return acc;
}

}  // namespace detail

inline double ScalarField::sample(double t, double x1, double x2) const {
    return detail::trilerp(grid, values, detail::locate(grid, t, x1, x2));
}

inline void VectorField::sample(double t, double x1, double x2, double& v1,
                                double& v2) const {
    auto c = detail::locate(grid, t, x1, x2);
    v1 = detail::trilerp(grid, u1, c);
    v2 = detail::trilerp(grid, u2, c);
}

/// Grayscale image sequence normalized to [0,1], stored as a ScalarField.
using ImageSequence = ScalarField;

}  // namespace convflow
