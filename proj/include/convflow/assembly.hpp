#pragma once

#include <array>
#include <tuple>

#include "convflow/field_ops.hpp"
#include "convflow/grid.hpp"
#include "convflow/quadrature.hpp"
#include "convflow/solver.hpp"
#include "convflow/sparse.hpp"

namespace convflow {

/// Mass matrix M_ij = int phi_i phi_j over E, trilinear basis.
inline CsrMatrix assemble_mass(const SpaceTimeGrid& g,
                               const QuadratureRule& rule = QuadratureRule::gauss(2)) {
    CsrMatrix m = CsrMatrix::from_pattern(g.nodes(), g.nodes(), grid_pattern(g));
    ElementBasis basis(g, rule);
    std::size_t nodes[8];
    double local[8][8];
    for (int k = 0; k + 1 < g.frames; ++k)
        for (int i = 0; i + 1 < g.height; ++i)
            for (int j = 0; j + 1 < g.width; ++j) {
                element_nodes(g, k, i, j, nodes);
                for (auto& row : local)
                    for (auto& v : row) v = 0.0;
                for (int q = 0; q < basis.n_quad; ++q)
                    for (int a = 0; a < 8; ++a)
                        for (int b = 0; b < 8; ++b)
                            local[a][b] += basis.weight[q] * basis.phi[q][a] * basis.phi[q][b];
                for (int a = 0; a < 8; ++a)
                    for (int b = 0; b < 8; ++b) m.add(nodes[a], nodes[b], local[a][b]);
            }
    return m;
}

/// L2 projection of the exact derivatives of the trilinear interpolant of f
/// into the FE space: solves M p = b with b_i = int phi_i d(f_h).
/// This is the FE-consistent derivative route used by the pipeline.
inline std::tuple<ScalarField, ScalarField, ScalarField> project_derivatives(
    const ScalarField& f, const QuadratureRule& rule = QuadratureRule::gauss(2),
    SolverConfig cfg = {}) {
    const SpaceTimeGrid& g = f.grid;
    CsrMatrix mass = assemble_mass(g, rule);
    ElementBasis basis(g, rule);

    std::array<std::vector<double>, 3> rhs;
    for (auto& r : rhs) r.assign(g.nodes(), 0.0);
    std::size_t nodes[8];
    for (int k = 0; k + 1 < g.frames; ++k)
        for (int i = 0; i + 1 < g.height; ++i)
            for (int j = 0; j + 1 < g.width; ++j) {
                element_nodes(g, k, i, j, nodes);
                for (int q = 0; q < basis.n_quad; ++q) {
                    double df[3] = {0, 0, 0};
                    for (int l = 0; l < 8; ++l)
                        for (int a = 0; a < 3; ++a)
                            df[a] += basis.grad[q][l][a] * f.values[nodes[l]];
                    for (int l = 0; l < 8; ++l) {
                        double w = basis.weight[q] * basis.phi[q][l];
                        for (int a = 0; a < 3; ++a) rhs[a][nodes[l]] += w * df[a];
                    }
                }
            }

    cfg.rel_tolerance = std::min(cfg.rel_tolerance, 1e-10);
    std::tuple<ScalarField, ScalarField, ScalarField> out{ScalarField(g), ScalarField(g),
                                                          ScalarField(g)};
    ScalarField* fields[3] = {&std::get<0>(out), &std::get<1>(out), &std::get<2>(out)};
    for (int a = 0; a < 3; ++a) {
        SolveReport rep = cg_solve(mass, rhs[a], fields[a]->values, cfg);
        if (!rep.converged)
            throw std::runtime_error("project_derivatives: mass solve stalled, residual " +
                                     std::to_string(rep.relative_residual));
    }
    return out;
}

/// Anisotropic space-time stiffness K_ij = int grad_bar(phi_i)' G grad_bar(phi_j)
/// with diffusion tensor G = alpha*wbar*wbar' + beta*Id, wbar = (tau, w1, w2)
/// interpolated at quadrature points. Shared by both flow components. Pure
/// Neumann: constants are in the kernel.
inline CsrMatrix assemble_stiffness(const SpaceTimeGrid& g, const VectorField& w,
                                    double alpha, double beta,
                                    const QuadratureRule& rule = QuadratureRule::gauss(2),
                                    double tau = 1.0) {
    detail::check_same_grid(g, w.grid, "assemble_stiffness");
    CsrMatrix kmat = CsrMatrix::from_pattern(g.nodes(), g.nodes(), grid_pattern(g));
    ElementBasis basis(g, rule);
    std::size_t nodes[8];
    double local[8][8];
    for (int k = 0; k + 1 < g.frames; ++k)
        for (int i = 0; i + 1 < g.height; ++i)
            for (int j = 0; j + 1 < g.width; ++j) {
                element_nodes(g, k, i, j, nodes);
                for (auto& row : local)
                    for (auto& v : row) v = 0.0;
                for (int q = 0; q < basis.n_quad; ++q) {
                    double w1 = 0, w2 = 0;
                    for (int l = 0; l < 8; ++l) {
                        w1 += basis.phi[q][l] * w.u1[nodes[l]];
                        w2 += basis.phi[q][l] * w.u2[nodes[l]];
                    }
                    const double wb[3] = {tau, w1, w2};
                    // G v = alpha*(wb.v)*wb + beta*v applied to basis gradients
                    double gw[8];  // wb . grad(phi_a)
                    for (int a = 0; a < 8; ++a)
                        gw[a] = wb[0] * basis.grad[q][a][0] + wb[1] * basis.grad[q][a][1] +
                                wb[2] * basis.grad[q][a][2];
                    for (int a = 0; a < 8; ++a)
                        for (int b = 0; b < 8; ++b) {
                            double gg = basis.grad[q][a][0] * basis.grad[q][b][0] +
                                        basis.grad[q][a][1] * basis.grad[q][b][1] +
                                        basis.grad[q][a][2] * basis.grad[q][b][2];
                            local[a][b] +=
                                basis.weight[q] * (alpha * gw[a] * gw[b] + beta * gg);
                        }
                }
                for (int a = 0; a < 8; ++a)
                    for (int b = 0; b < 8; ++b) kmat.add(nodes[a], nodes[b], local[a][b]);
            }
    return kmat;
}

struct DataBlocks {
    CsrMatrix d11, d12, d22;
    std::vector<double> rhs1, rhs2;
};

/// Weighted data-term coupling blocks and right-hand side:
///   D^{pq}_kl = int lambda^2 f_{x^p} f_{x^q} phi_k phi_l,
///   rhs^p_k  = -int lambda^2 f_t f_{x^p} phi_k.
/// Coefficients are trilinearly interpolated at quadrature points.
inline DataBlocks assemble_data_blocks(const SpaceTimeGrid& g, const ScalarField& ft,
                                       const ScalarField& fx1, const ScalarField& fx2,
                                       const ScalarField& lambda,
                                       const QuadratureRule& rule = QuadratureRule::gauss(2)) {
    detail::check_same_grid(g, ft.grid, "assemble_data_blocks");
    detail::check_same_grid(g, lambda.grid, "assemble_data_blocks");
    for (double v : lambda.values)
        if (!(v > 0.0))
            throw std::invalid_argument("assemble_data_blocks: lambda must be positive");

    DataBlocks blocks;
    auto pattern = grid_pattern(g);
    blocks.d11 = CsrMatrix::from_pattern(g.nodes(), g.nodes(), pattern);
    blocks.d12 = CsrMatrix::from_pattern(g.nodes(), g.nodes(), pattern);
    blocks.d22 = CsrMatrix::from_pattern(g.nodes(), g.nodes(), pattern);
    blocks.rhs1.assign(g.nodes(), 0.0);
    blocks.rhs2.assign(g.nodes(), 0.0);

    ElementBasis basis(g, rule);
    std::size_t nodes[8];
    double l11[8][8], l12[8][8], l22[8][8];
    for (int k = 0; k + 1 < g.frames; ++k)
        for (int i = 0; i + 1 < g.height; ++i)
            for (int j = 0; j + 1 < g.width; ++j) {
                element_nodes(g, k, i, j, nodes);
                for (int a = 0; a < 8; ++a)
                    for (int b = 0; b < 8; ++b) l11[a][b] = l12[a][b] = l22[a][b] = 0.0;
                for (int q = 0; q < basis.n_quad; ++q) {
                    double lam = 0, vft = 0, v1 = 0, v2 = 0;
                    for (int l = 0; l < 8; ++l) {
                        double p = basis.phi[q][l];
                        lam += p * lambda.values[nodes[l]];
                        vft += p * ft.values[nodes[l]];
                        v1 += p * fx1.values[nodes[l]];
                        v2 += p * fx2.values[nodes[l]];
                    }
                    double c = basis.weight[q] * lam * lam;
                    for (int a = 0; a < 8; ++a) {
                        double pa = basis.phi[q][a];
                        blocks.rhs1[nodes[a]] -= c * vft * v1 * pa;
                        blocks.rhs2[nodes[a]] -= c * vft * v2 * pa;
                        for (int b = 0; b < 8; ++b) {
                            double pp = pa * basis.phi[q][b];
                            l11[a][b] += c * v1 * v1 * pp;
                            l12[a][b] += c * v1 * v2 * pp;
                            l22[a][b] += c * v2 * v2 * pp;
                        }
                    }
                }
                for (int a = 0; a < 8; ++a)
                    for (int b = 0; b < 8; ++b) {
                        blocks.d11.add(nodes[a], nodes[b], l11[a][b]);
                        blocks.d12.add(nodes[a], nodes[b], l12[a][b]);
                        blocks.d22.add(nodes[a], nodes[b], l22[a][b]);
                    }
            }
    return blocks;
}

/// Full linear Euler-Lagrange system for one lagged step:
///   A11 = K + D11, A22 = K + D22, A12 = A21 = D12, b from the data term.
/// The solved u minimizes the discrete quadratic u'Au - 2b'u, i.e. the
/// surrogate G(u, w) up to a constant.
inline BlockSparseSystem assemble_system(const SpaceTimeGrid& g, const ScalarField& ft,
                                         const ScalarField& fx1, const ScalarField& fx2,
                                         const ScalarField& lambda, const VectorField& w,
                                         double alpha, double beta,
                                         const QuadratureRule& rule = QuadratureRule::gauss(2),
                                         double tau = 1.0) {
    CsrMatrix kmat = assemble_stiffness(g, w, alpha, beta, rule, tau);
    DataBlocks data = assemble_data_blocks(g, ft, fx1, fx2, lambda, rule);

    BlockSparseSystem sys;
    sys.a11 = data.d11;
    for (std::size_t p = 0; p < kmat.val.size(); ++p) sys.a11.val[p] += kmat.val[p];
    sys.a22 = data.d22;
    for (std::size_t p = 0; p < kmat.val.size(); ++p) sys.a22.val[p] += kmat.val[p];
    sys.a12 = std::move(data.d12);
    sys.a21 = sys.a12;  // D12 is symmetric, so A21 = A12' = A12
    sys.b1 = std::move(data.rhs1);
    sys.b2 = std::move(data.rhs2);
    return sys;
}

}  // namespace convflow
