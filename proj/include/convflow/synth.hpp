#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "convflow/grid.hpp"

namespace convflow {

/// Closed-form velocity fields: the zero-acceleration families (axis-parallel,
/// radial, Burgers) plus rotation, constants and the nonconvexity midpoint
/// field. Values are in physical units (pixels per unit time).
struct AnalyticFlow {
    enum class Kind {
        constant,          // (c1, c2)
        axis_parallel_x1,  // (0, g(x1)): columns speed varies with the row
        axis_parallel_x2,  // (g(x2), 0)
        radial,            // g(phi) * e_r about a center outside the domain
        burgers_linear,    // (a*x1/(1 + a*t), 0)
        rotation,          // (-(x2-cy), x1-cx)
        midpoint_example   // (x2/2, x1/2)
    };

    Kind kind = Kind::constant;
    double c1 = 0.0, c2 = 0.0;                     // constant components
    double a = 1.0;                                // burgers slope
    double cx = 0.0, cy = 0.0;                     // radial / rotation center
    std::function<double(double)> g = [](double s) { return s; };

    void eval(double t, double x1, double x2, double& v1, double& v2) const {
        switch (kind) {
            case Kind::constant:
                v1 = c1;
                v2 = c2;
                return;
            case Kind::axis_parallel_x1:
                v1 = 0.0;
                v2 = g(x1);
                return;
            case Kind::axis_parallel_x2:
                v1 = g(x2);
                v2 = 0.0;
                return;
            case Kind::radial: {
                double d1 = x1 - cx, d2 = x2 - cy;
                double phi = std::atan2(d2, d1);
                double r = std::hypot(d1, d2);
                double s = g(phi) / r;
                v1 = s * d1;
                v2 = s * d2;
                return;
            }
            case Kind::burgers_linear: {
                double denom = 1.0 + a * t;
                if (!(denom > 0.0))
                    throw std::domain_error("AnalyticFlow: burgers blowup, 1 + a*t <= 0");
                v1 = a * x1 / denom;
                v2 = 0.0;
                return;
            }
            case Kind::rotation:
                v1 = -(x2 - cy);
                v2 = x1 - cx;
                return;
            case Kind::midpoint_example:
                v1 = 0.5 * x2;
                v2 = 0.5 * x1;
                return;
        }
        throw std::logic_error("AnalyticFlow: unknown kind");
    }
};

/// Nodal samples of a closed-form field. Validates the domain constraints
/// (radial center outside the spatial rectangle, Burgers denominator positive).
inline VectorField sample_flow(const AnalyticFlow& spec, const SpaceTimeGrid& g) {
    if (spec.kind == AnalyticFlow::Kind::radial) {
        bool inside = spec.cx >= 0.0 && spec.cx <= g.extent_x1() && spec.cy >= 0.0 &&
                      spec.cy <= g.extent_x2();
        if (inside)
            throw std::invalid_argument("sample_flow: radial center must lie outside the domain");
    }
    if (spec.kind == AnalyticFlow::Kind::burgers_linear) {
        if (!(1.0 + spec.a * 0.0 > 0.0) || !(1.0 + spec.a * g.duration() > 0.0))
            throw std::invalid_argument("sample_flow: burgers requires 1 + a*t > 0 on [0,T]");
    }
    VectorField u(g);
    for (int k = 0; k < g.frames; ++k)
        for (int i = 0; i < g.height; ++i)
            for (int j = 0; j < g.width; ++j) {
                double v1, v2;
                spec.eval(g.t_of(k), g.x1_of(i), g.x2_of(j), v1, v2);
                std::size_t n = g.index(k, i, j);
                u.u1[n] = v1;
                u.u2[n] = v2;
            }
    return u;
}

namespace detail {

inline double bilinear(const std::vector<double>& img, int h, int w, double x1,
                       double x2) {
    auto clampf = [](double s, double lo, double hi) {
        return s < lo ? lo : (s > hi ? hi : s);
    };
    x1 = clampf(x1, 0.0, h - 1.0);
    x2 = clampf(x2, 0.0, w - 1.0);
    int i0 = std::min(static_cast<int>(x1), h - 2);
    int j0 = std::min(static_cast<int>(x2), w - 2);
    double wi = x1 - i0, wj = x2 - j0;
    return (1 - wi) * (1 - wj) * img[i0 * w + j0] + (1 - wi) * wj * img[i0 * w + j0 + 1] +
           wi * (1 - wj) * img[(i0 + 1) * w + j0] + wi * wj * img[(i0 + 1) * w + j0 + 1];
}

}  // namespace detail

/// Backward-warp a template along a constant flow given in pixels per frame.
/// Integer shifts are exact.
inline ImageSequence advect_sequence(const std::vector<double>& tmpl,
                                     const SpaceTimeGrid& g, double v1_per_frame,
                                     double v2_per_frame) {
    if (tmpl.size() != static_cast<std::size_t>(g.height) * g.width)
        throw std::invalid_argument("advect_sequence: template size mismatch");
    ImageSequence f(g);
    for (int k = 0; k < g.frames; ++k)
        for (int i = 0; i < g.height; ++i)
            for (int j = 0; j < g.width; ++j)
                f(k, i, j) = detail::bilinear(tmpl, g.height, g.width,
                                              i - k * v1_per_frame, j - k * v2_per_frame);
    return f;
}

/// Backward-warp a template along an analytic flow: every frame-k pixel is
/// traced back to t = 0 with RK4 and sampled bilinearly (clamped at the
/// boundary).
inline ImageSequence advect_sequence(const std::vector<double>& tmpl,
                                     const SpaceTimeGrid& g, const AnalyticFlow& flow,
                                     double step = -1.0) {
    if (tmpl.size() != static_cast<std::size_t>(g.height) * g.width)
        throw std::invalid_argument("advect_sequence: template size mismatch");
    if (step <= 0.0) step = g.dt / 4.0;
    ImageSequence f(g);
    for (int k = 0; k < g.frames; ++k) {
        double t_k = g.t_of(k);
        for (int i = 0; i < g.height; ++i)
            for (int j = 0; j < g.width; ++j) {
                double t = t_k, x1 = g.x1_of(i), x2 = g.x2_of(j);
                while (t > 1e-14) {
                    double h = std::min(step, t);
                    double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
                    flow.eval(t, x1, x2, k1a, k1b);
                    flow.eval(t - 0.5 * h, x1 - 0.5 * h * k1a, x2 - 0.5 * h * k1b, k2a, k2b);
                    flow.eval(t - 0.5 * h, x1 - 0.5 * h * k2a, x2 - 0.5 * h * k2b, k3a, k3b);
                    flow.eval(t - h, x1 - h * k3a, x2 - h * k3b, k4a, k4b);
                    x1 -= h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
                    x2 -= h / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
                    t -= h;
                }
                f(k, i, j) = detail::bilinear(tmpl, g.height, g.width, x1, x2);
            }
    }
    return f;
}

/// A synthetic sequence with its exact flow. The flow is stored in pixels per
/// frame (image convention); divide by dt for the physical-unit field the
/// estimator works with. Masks select node subsets for region statistics.
struct GroundTruthPair {
    ImageSequence sequence;
    VectorField flow_px_per_frame;
    std::map<std::string, std::vector<std::uint8_t>> masks;
};

namespace detail {

struct MovingSquare {
    double c1, c2;        // start center (row, col)
    double v1, v2;        // pixels per frame
    double half;          // half side length
    double intensity;
    double texture_amp = 0.5;  // relative amplitude of the co-moving texture
    // smoothstep edge over a 2 px band centered on the nominal boundary
    double coverage(double t_frames, double i, double j) const {
        double d = std::max(std::abs(i - (c1 + v1 * t_frames)) - half,
                            std::abs(j - (c2 + v2 * t_frames)) - half);
        double s = (1.0 - d) / 2.0;  // d=-1 -> 1, d=+1 -> 0
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return 1.0;
        return s * s * (3.0 - 2.0 * s);
    }
    // smooth zero-mean pattern riding with the square; multiplicative, so the
    // interior gradient strength scales with the object's brightness
    double shade(double t_frames, double i, double j) const {
        constexpr double period = 6.0;
        double di = i - (c1 + v1 * t_frames), dj = j - (c2 + v2 * t_frames);
        return intensity * (1.0 + texture_amp * std::sin(2.0 * M_PI * di / period) *
                                      std::sin(2.0 * M_PI * dj / period));
    }
    bool interior(double t_frames, double i, double j, double margin = 2.0) const {
        double d = std::max(std::abs(i - (c1 + v1 * t_frames)) - half,
                            std::abs(j - (c2 + v2 * t_frames)) - half);
        return d <= -(1.0 + margin);
    }
};

/// Seeded smoothed noise in [0, amplitude]: a static anchor for the data term.
inline std::vector<double> noise_background(const SpaceTimeGrid& g, unsigned seed,
                                            double amplitude) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, amplitude);
    std::vector<double> bg(static_cast<std::size_t>(g.height) * g.width);
    for (auto& v : bg) v = dist(rng);
    // light smoothing so image derivatives are grid-resolvable
    std::vector<double> sm = bg;
    for (int pass = 0; pass < 2; ++pass) {
        for (int i = 1; i + 1 < g.height; ++i)
            for (int j = 1; j + 1 < g.width; ++j)
                sm[i * g.width + j] =
                    0.25 * bg[i * g.width + j] +
                    0.1875 * (bg[(i - 1) * g.width + j] + bg[(i + 1) * g.width + j] +
                              bg[i * g.width + j - 1] + bg[i * g.width + j + 1]);
        bg = sm;
    }
    return bg;
}

inline GroundTruthPair render_squares(const SpaceTimeGrid& g,
                                      const std::vector<MovingSquare>& squares,
                                      const std::vector<double>& background,
                                      const std::vector<std::string>& mask_names) {
    GroundTruthPair out;
    out.sequence = ImageSequence(g);
    out.flow_px_per_frame = VectorField(g);
    for (const auto& name : mask_names) out.masks[name].assign(g.nodes(), 0);
    std::vector<std::uint8_t>& all = out.masks["objects"];
    if (all.empty()) all.assign(g.nodes(), 0);

    for (int k = 0; k < g.frames; ++k)
        for (int i = 0; i < g.height; ++i)
            for (int j = 0; j < g.width; ++j) {
                std::size_t n = g.index(k, i, j);
                double val = background.empty() ? 0.0 : background[i * g.width + j];
                for (std::size_t s = 0; s < squares.size(); ++s) {
                    const auto& sq = squares[s];
                    double cov = sq.coverage(k, i, j);
                    val = val * (1.0 - cov) + sq.shade(k, i, j) * cov;
                    if (cov > 0.5) {
                        out.flow_px_per_frame.u1[n] = sq.v1;
                        out.flow_px_per_frame.u2[n] = sq.v2;
                    }
                    if (sq.interior(k, i, j)) {
                        all[n] = 1;
                        if (s < mask_names.size()) out.masks[mask_names[s]][n] = 1;
                    }
                }
                out.sequence.values[n] = std::min(1.0, std::max(0.0, val));
            }
    return out;
}

}  // namespace detail

/// Named deterministic scenarios on a 48x48 grid with 16 frames.
inline GroundTruthPair scenario(const std::string& name, double dt = 0.125,
                                unsigned seed = 1234) {
    SpaceTimeGrid g(16, 48, 48, dt);
    using MS = detail::MovingSquare;
    if (name == "translating_square") {
        return detail::render_squares(g, {MS{12, 20, 0.5, 0.25, 6.0, 0.8}}, {},
                                      {"square"});
    }
    if (name == "two_objects_contrast") {
        // equal speeds, very different brightness: the weighting probe. The
        // faint static texture anchors the background, so an unweighted data
        // term lets regularization overrun the dim object first.
        return detail::render_squares(
            g, {MS{11, 12, 0.0, 0.5, 5.0, 0.9}, MS{34, 12, 0.0, 0.5, 5.0, 0.2}},
            detail::noise_background(g, seed, 0.3), {"bright", "dim"});
    }
    if (name == "converging_pair") {
        return detail::render_squares(
            g, {MS{24, 9, 0.0, 0.5, 5.0, 0.8}, MS{24, 38, 0.0, -0.5, 5.0, 0.6}},
            detail::noise_background(g, seed, 0.1), {"left", "right"});
    }
    if (name == "diverging_pair") {
        return detail::render_squares(
            g, {MS{24, 17, 0.0, -0.5, 5.0, 0.8}, MS{24, 30, 0.0, 0.5, 5.0, 0.6}},
            detail::noise_background(g, seed, 0.1), {"left", "right"});
    }
    if (name == "textured_background") {
        return detail::render_squares(g, {MS{14, 14, 0.5, 0.5, 6.0, 0.9}},
                                      detail::noise_background(g, seed, 0.25),
                                      {"square"});
    }
    throw std::invalid_argument("scenario: unknown name '" + name + "'");
}

}  // namespace convflow
