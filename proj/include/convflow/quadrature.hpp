#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "convflow/grid.hpp"

namespace convflow {

/// Tensor-product Gauss rule on the reference cube (-1,1)^3.
/// Weights sum to the reference volume 8.
struct QuadratureRule {
    struct Point {
        double xi[3];
        double weight;
    };
    std::vector<Point> points;
    int order = 0;  // points per axis

    static QuadratureRule gauss(int points_per_axis) {
        std::vector<double> x, w;
        switch (points_per_axis) {
            case 2:
                x = {-0.5773502691896257, 0.5773502691896257};
                w = {1.0, 1.0};
                break;
            case 3:
                x = {-0.7745966692414834, 0.0, 0.7745966692414834};
                w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
                break;
            default:
                throw std::invalid_argument("QuadratureRule: only 2 and 3 point rules");
        }
        QuadratureRule rule;
        rule.order = points_per_axis;
        for (std::size_t a = 0; a < x.size(); ++a)
            for (std::size_t b = 0; b < x.size(); ++b)
                for (std::size_t c = 0; c < x.size(); ++c)
                    rule.points.push_back({{x[a], x[b], x[c]}, w[a] * w[b] * w[c]});
        return rule;
    }
};

/// Trilinear basis tables for one quadrature rule on a given grid.
///
/// Local node ordering is t-major, then row, then column:
/// l = (lt*2 + li)*2 + lj. Gradients are in physical units (the reference
/// cube (-1,1)^3 maps to an element of extents dt x hx x hy).
struct ElementBasis {
    int n_quad = 0;
    // phi[q][l], grad[q][l][axis] with axis 0 = t, 1 = x1, 2 = x2
    std::vector<std::array<double, 8>> phi;
    std::vector<std::array<std::array<double, 3>, 8>> grad;
    std::vector<double> weight;  // quadrature weight times Jacobian determinant
    double jac_det = 0.0;

    ElementBasis(const SpaceTimeGrid& g, const QuadratureRule& rule) {
        n_quad = static_cast<int>(rule.points.size());
        jac_det = g.dt * g.hx * g.hy / 8.0;
        const double scale[3] = {2.0 / g.dt, 2.0 / g.hx, 2.0 / g.hy};
        phi.resize(n_quad);
        grad.resize(n_quad);
        weight.resize(n_quad);
        for (int q = 0; q < n_quad; ++q) {
            const auto& p = rule.points[q];
            weight[q] = p.weight * jac_det;
            for (int l = 0; l < 8; ++l) {
                const int s[3] = {(l >> 2) & 1 ? 1 : -1, (l >> 1) & 1 ? 1 : -1,
                                  l & 1 ? 1 : -1};
                double f[3], df[3];
                for (int a = 0; a < 3; ++a) {
                    f[a] = 0.5 * (1.0 + s[a] * p.xi[a]);
                    df[a] = 0.5 * s[a];
                }
                phi[q][l] = f[0] * f[1] * f[2];
                grad[q][l][0] = df[0] * f[1] * f[2] * scale[0];
                grad[q][l][1] = f[0] * df[1] * f[2] * scale[1];
                grad[q][l][2] = f[0] * f[1] * df[2] * scale[2];
            }
        }
    }
};

/// Flat node indices of the 8 corners of cell (k,i,j), in local ordering.
inline void element_nodes(const SpaceTimeGrid& g, int k, int i, int j,
                          std::size_t out[8]) {
    for (int l = 0; l < 8; ++l) {
        int lt = (l >> 2) & 1, li = (l >> 1) & 1, lj = l & 1;
        out[l] = g.index(k + lt, i + li, j + lj);
    }
}

}  // namespace convflow
