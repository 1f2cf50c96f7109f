#pragma once

#include <array>
#include <cmath>
#include <tuple>

#include "convflow/grid.hpp"
#include "convflow/quadrature.hpp"

namespace convflow {

/// Nodal finite-difference derivatives: central at interior nodes, one-sided
/// first order at faces. Diagnostic route; the FE-consistent derivatives live
/// in the assembly module (project_derivatives).
inline std::tuple<ScalarField, ScalarField, ScalarField> nodal_derivatives(
    const ScalarField& f) {
    const SpaceTimeGrid& g = f.grid;
    ScalarField dt_(g), dx1(g), dx2(g);
    auto stencil = [](double prev, double mid, double next, int pos, int n,
                      double h) {
        if (pos == 0) return (next - mid) / h;
        if (pos == n - 1) return (mid - prev) / h;
        return (next - prev) / (2.0 * h);
    };
    for (int k = 0; k < g.frames; ++k)
        for (int i = 0; i < g.height; ++i)
            for (int j = 0; j < g.width; ++j) {
                double c = f(k, i, j);
                dt_(k, i, j) = stencil(k > 0 ? f(k - 1, i, j) : 0.0, c,
                                       k < g.frames - 1 ? f(k + 1, i, j) : 0.0, k,
                                       g.frames, g.dt);
                dx1(k, i, j) = stencil(i > 0 ? f(k, i - 1, j) : 0.0, c,
                                       i < g.height - 1 ? f(k, i + 1, j) : 0.0, i,
                                       g.height, g.hx);
                dx2(k, i, j) = stencil(j > 0 ? f(k, i, j - 1) : 0.0, c,
                                       j < g.width - 1 ? f(k, i, j + 1) : 0.0, j,
                                       g.width, g.hy);
            }
    return {std::move(dt_), std::move(dx1), std::move(dx2)};
}

/// D_u f = f_t + f_x1 u1 + f_x2 u2 at every node.
inline ScalarField convective_derivative(const ScalarField& f, const VectorField& u) {
    detail::check_same_grid(f.grid, u.grid, "convective_derivative");
    auto [ft, fx1, fx2] = nodal_derivatives(f);
    ScalarField out(f.grid);
    for (std::size_t n = 0; n < out.values.size(); ++n)
        out.values[n] = ft.values[n] + fx1.values[n] * u.u1[n] + fx2.values[n] * u.u2[n];
    return out;
}

/// Componentwise convective derivative of a vector field.
inline VectorField convective_derivative(const VectorField& f, const VectorField& u) {
    detail::check_same_grid(f.grid, u.grid, "convective_derivative");
    VectorField out(f.grid);
    ScalarField comp(f.grid);
    comp.values = f.u1;
    out.u1 = convective_derivative(comp, u).values;
    comp.values = f.u2;
    out.u2 = convective_derivative(comp, u).values;
    return out;
}

/// Convective acceleration D_u u = u_t + (grad u) u.
inline VectorField convective_acceleration(const VectorField& u) {
    return convective_derivative(u, u);
}

/// The three L2 terms of the flow functional and their weighted sum.
struct EnergyBreakdown {
    double data = 0.0;        // ||lambda D_u f||^2
    double convective = 0.0;  // ||D_u u||^2
    double isotropic = 0.0;   // ||grad_bar u||^2
    double total = 0.0;       // data + alpha*convective + beta*isotropic
};

namespace detail {

/// Element-loop evaluation of the three energy integrals for the surrogate
/// G(u, w): data and isotropic terms in u, convective term measured along w
/// (the diffusion direction w_bar = (tau, w1, w2)). E(u) is the case w = u.
///
/// All coefficient fields are trilinearly interpolated at quadrature points;
/// u enters through its FE interpolant and exact element gradients.
inline void energy_terms(const VectorField& u, const VectorField& w,
                         const ScalarField& ft, const ScalarField& fx1,
                         const ScalarField& fx2, const ScalarField& lambda,
                         const QuadratureRule& rule, double tau, double& data,
                         double& convective, double& isotropic) {
    const SpaceTimeGrid& g = u.grid;
    ElementBasis basis(g, rule);
    data = convective = isotropic = 0.0;
    std::size_t nodes[8];
    for (int k = 0; k + 1 < g.frames; ++k)
        for (int i = 0; i + 1 < g.height; ++i)
            for (int j = 0; j + 1 < g.width; ++j) {
                element_nodes(g, k, i, j, nodes);
                for (int q = 0; q < basis.n_quad; ++q) {
                    double lam = 0, vft = 0, vfx1 = 0, vfx2 = 0;
                    double vu1 = 0, vu2 = 0, vw1 = 0, vw2 = 0;
                    double gu1[3] = {0, 0, 0}, gu2[3] = {0, 0, 0};
                    for (int l = 0; l < 8; ++l) {
                        std::size_t n = nodes[l];
                        double p = basis.phi[q][l];
                        lam += p * lambda.values[n];
                        vft += p * ft.values[n];
                        vfx1 += p * fx1.values[n];
                        vfx2 += p * fx2.values[n];
                        vu1 += p * u.u1[n];
                        vu2 += p * u.u2[n];
                        vw1 += p * w.u1[n];
                        vw2 += p * w.u2[n];
                        for (int a = 0; a < 3; ++a) {
                            gu1[a] += basis.grad[q][l][a] * u.u1[n];
                            gu2[a] += basis.grad[q][l][a] * u.u2[n];
                        }
                    }
                    double wq = basis.weight[q];
                    double rd = vft + vfx1 * vu1 + vfx2 * vu2;
                    data += wq * lam * lam * rd * rd;
                    double wb[3] = {tau, vw1, vw2};
                    double c1 = gu1[0] * wb[0] + gu1[1] * wb[1] + gu1[2] * wb[2];
                    double c2 = gu2[0] * wb[0] + gu2[1] * wb[1] + gu2[2] * wb[2];
                    convective += wq * (c1 * c1 + c2 * c2);
                    for (int a = 0; a < 3; ++a)
                        isotropic += wq * (gu1[a] * gu1[a] + gu2[a] * gu2[a]);
                }
            }
}

}  // namespace detail

/// E(u) = ||lambda D_u f||^2 + alpha ||D_u u||^2 + beta ||grad_bar u||^2,
/// evaluated by FE quadrature. f enters through its three nodal derivative
/// fields (projected or finite-difference).
inline EnergyBreakdown energy(const VectorField& u, const ScalarField& ft,
                              const ScalarField& fx1, const ScalarField& fx2,
                              const ScalarField& lambda, double alpha, double beta,
                              const QuadratureRule& rule = QuadratureRule::gauss(2),
                              double tau = 1.0) {
    detail::check_same_grid(u.grid, ft.grid, "energy");
    detail::check_same_grid(u.grid, lambda.grid, "energy");
    for (double v : lambda.values)
        if (!(v > 0.0)) throw std::invalid_argument("energy: lambda must be positive");
    EnergyBreakdown e;
    detail::energy_terms(u, u, ft, fx1, fx2, lambda, rule, tau, e.data, e.convective,
                         e.isotropic);
    e.total = e.data + alpha * e.convective + beta * e.isotropic;
    return e;
}

/// Surrogate G(u, w) with the convective term lagged at w.
inline EnergyBreakdown surrogate_energy(
    const VectorField& u, const VectorField& w, const ScalarField& ft,
    const ScalarField& fx1, const ScalarField& fx2, const ScalarField& lambda,
    double alpha, double beta, const QuadratureRule& rule = QuadratureRule::gauss(2),
    double tau = 1.0) {
    detail::check_same_grid(u.grid, w.grid, "surrogate_energy");
    EnergyBreakdown e;
    detail::energy_terms(u, w, ft, fx1, fx2, lambda, rule, tau, e.data, e.convective,
                         e.isotropic);
    e.total = e.data + alpha * e.convective + beta * e.isotropic;
    return e;
}

}  // namespace convflow
