#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "convflow/assembly.hpp"
#include "convflow/field_ops.hpp"
#include "convflow/grid.hpp"
#include "convflow/solver.hpp"

namespace convflow {

struct FlowParams {
    double alpha1 = 5e-3;            // convective weight
    double beta1 = 5e-4;             // isotropic weight
    double beta0 = -1.0;             // initialization weight; < 0 means "= alpha1"
    double epsilon = 0.01;           // weight floor in omega = sqrt(|grad_bar f|^2 + eps^2)
    bool weighted = true;            // lambda = 1/omega; false: lambda = 1
    double time_axis_weight = 1.0;   // leading entry of wbar = (tau, w1, w2)
    int max_outer_iterations = 8;
    double stabilization_tol = 1e-3; // relative step norm stop
    int quadrature_order = 2;        // Gauss points per axis, 2 or 3
    SolverConfig solver;

    double init_beta() const { return beta0 >= 0.0 ? beta0 : alpha1; }
    QuadratureRule rule() const { return QuadratureRule::gauss(quadrature_order); }
};

struct IterationRecord {
    int k = 0;
    EnergyBreakdown energy_at_iterate;  // E(u_k)
    double surrogate = 0.0;             // G(u_{k+1}, u_k)
    double step_norm = 0.0;             // ||u_{k+1}-u_k|| / ||u_k||
    SolveReport solve;
};

struct IterationTrace {
    SolveReport init_solve;
    std::vector<IterationRecord> records;
    bool stabilized = false;
};

/// Contrast-invariance weight lambda = 1/sqrt(f_t^2 + f_x1^2 + f_x2^2 + eps^2),
/// nodal. Bounded by 1/eps, so never singular.
inline ScalarField compute_weight(const ScalarField& ft, const ScalarField& fx1,
                                  const ScalarField& fx2, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("compute_weight: eps must be > 0");
    ScalarField lambda(ft.grid);
    for (std::size_t n = 0; n < lambda.values.size(); ++n) {
        double g2 = ft.values[n] * ft.values[n] + fx1.values[n] * fx1.values[n] +
                    fx2.values[n] * fx2.values[n];
        lambda.values[n] = 1.0 / std::sqrt(g2 + epsilon * epsilon);
    }
    return lambda;
}

/// Derivatives and weight of an image sequence, computed once per sequence.
struct SequenceData {
    ScalarField ft, fx1, fx2, lambda;

    static SequenceData build(const ImageSequence& f, const FlowParams& params) {
        SequenceData d;
        std::tie(d.ft, d.fx1, d.fx2) = project_derivatives(f, params.rule());
        if (params.weighted)
            d.lambda = compute_weight(d.ft, d.fx1, d.fx2, params.epsilon);
        else
            d.lambda = ScalarField(f.grid, 1.0);
        return d;
    }
};

namespace detail {

inline double step_norm(const VectorField& a, const VectorField& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < a.u1.size(); ++n) {
        double d1 = a.u1[n] - b.u1[n], d2 = a.u2[n] - b.u2[n];
        num += d1 * d1 + d2 * d2;
        den += b.u1[n] * b.u1[n] + b.u2[n] * b.u2[n];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace detail

/// Initial guess: minimize G(u, .) with alpha = 0, beta = beta0 — the
/// time-regularized Horn-Schunck model.
inline std::pair<VectorField, SolveReport> horn_schunck_init(const SequenceData& seq,
                                                             const SpaceTimeGrid& g,
                                                             const FlowParams& params) {
    VectorField zero(g);
    auto rule = params.rule();
    BlockSparseSystem sys = assemble_system(g, seq.ft, seq.fx1, seq.fx2, seq.lambda, zero,
                                            0.0, params.init_beta(), rule,
                                            params.time_axis_weight);
    return cg_solve(sys, zero, params.solver);
}

inline std::pair<VectorField, SolveReport> horn_schunck_init(const ImageSequence& f,
                                                             const FlowParams& params) {
    return horn_schunck_init(SequenceData::build(f, params), f.grid, params);
}

/// Full lagged-coefficient scheme: Horn-Schunck initialization, then repeated
/// minimization of G(u, u_k) with the diffusion tensor frozen at u_k. Stops
/// when the relative step norm drops below stabilization_tol or the outer
/// iteration cap is hit. The inner CG is warm-started from u_k.
inline std::pair<VectorField, IterationTrace> convective_iterate(const SequenceData& seq,
                                                                 const SpaceTimeGrid& g,
                                                                 const FlowParams& params) {
    IterationTrace trace;
    auto rule = params.rule();
    auto [u, init_rep] = horn_schunck_init(seq, g, params);
    trace.init_solve = init_rep;
    if (!init_rep.converged)
        throw std::runtime_error("convective_iterate: initialization solve failed");

    for (int k = 0; k < params.max_outer_iterations; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.energy_at_iterate =
            energy(u, seq.ft, seq.fx1, seq.fx2, seq.lambda, params.alpha1, params.beta1,
                   rule, params.time_axis_weight);
        BlockSparseSystem sys =
            assemble_system(g, seq.ft, seq.fx1, seq.fx2, seq.lambda, u, params.alpha1,
                            params.beta1, rule, params.time_axis_weight);
        auto [u_next, rep] = cg_solve(sys, u, params.solver);
        rec.solve = rep;
        if (!rep.converged) {
            trace.records.push_back(rec);
            throw std::runtime_error("convective_iterate: inner solve failed at k=" +
                                     std::to_string(k));
        }
        rec.surrogate = surrogate_energy(u_next, u, seq.ft, seq.fx1, seq.fx2, seq.lambda,
                                         params.alpha1, params.beta1, rule,
                                         params.time_axis_weight)
                            .total;
        rec.step_norm = detail::step_norm(u_next, u);
        trace.records.push_back(rec);
        u = std::move(u_next);
        if (rec.step_norm < params.stabilization_tol) {
            trace.stabilized = true;
            break;
        }
    }
    return {std::move(u), std::move(trace)};
}

inline std::pair<VectorField, IterationTrace> convective_iterate(const ImageSequence& f,
                                                                 const FlowParams& params) {
    return convective_iterate(SequenceData::build(f, params), f.grid, params);
}

/// Gradient of the full discrete nonconvex energy E at u, including the
/// first-order transport part that the lagged scheme never assembles.
/// Diagnostic only. Returned as a nodal vector field (one gradient entry per
/// unknown).
inline VectorField el_residual(const VectorField& u, const ScalarField& ft,
                               const ScalarField& fx1, const ScalarField& fx2,
                               const ScalarField& lambda, double alpha, double beta,
                               const QuadratureRule& rule = QuadratureRule::gauss(2),
                               double tau = 1.0) {
    const SpaceTimeGrid& g = u.grid;
    detail::check_same_grid(g, ft.grid, "el_residual");
    VectorField grad(g);
    ElementBasis basis(g, rule);
    std::size_t nodes[8];
    for (int k = 0; k + 1 < g.frames; ++k)
        for (int i = 0; i + 1 < g.height; ++i)
            for (int j = 0; j + 1 < g.width; ++j) {
                element_nodes(g, k, i, j, nodes);
                for (int q = 0; q < basis.n_quad; ++q) {
                    double lam = 0, vft = 0, vfx1 = 0, vfx2 = 0, vu1 = 0, vu2 = 0;
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
                        for (int a = 0; a < 3; ++a) {
                            gu1[a] += basis.grad[q][l][a] * u.u1[n];
                            gu2[a] += basis.grad[q][l][a] * u.u2[n];
                        }
                    }
                    const double wq = basis.weight[q];
                    const double rd = vft + vfx1 * vu1 + vfx2 * vu2;
                    const double wb[3] = {tau, vu1, vu2};
                    const double c1 = gu1[0] * wb[0] + gu1[1] * wb[1] + gu1[2] * wb[2];
                    const double c2 = gu2[0] * wb[0] + gu2[1] * wb[1] + gu2[2] * wb[2];
                    for (int l = 0; l < 8; ++l) {
                        std::size_t n = nodes[l];
                        double p = basis.phi[q][l];
                        double gphi_wb = basis.grad[q][l][0] * wb[0] +
                                         basis.grad[q][l][1] * wb[1] +
                                         basis.grad[q][l][2] * wb[2];
                        double giso1 = gu1[0] * basis.grad[q][l][0] +
                                       gu1[1] * basis.grad[q][l][1] +
                                       gu1[2] * basis.grad[q][l][2];
                        double giso2 = gu2[0] * basis.grad[q][l][0] +
                                       gu2[1] * basis.grad[q][l][1] +
                                       gu2[2] * basis.grad[q][l][2];
                        // transport part: d(wbar)/du_c picks the spatial entries
                        double trans1 = c1 * gu1[1] + c2 * gu2[1];
                        double trans2 = c1 * gu1[2] + c2 * gu2[2];
                        grad.u1[n] += wq * (2.0 * lam * lam * rd * vfx1 * p +
                                            2.0 * alpha * (c1 * gphi_wb + trans1 * p) +
                                            2.0 * beta * giso1);
                        grad.u2[n] += wq * (2.0 * lam * lam * rd * vfx2 * p +
                                            2.0 * alpha * (c2 * gphi_wb + trans2 * p) +
                                            2.0 * beta * giso2);
                    }
                }
            }
    return grad;
}

/// Well-posedness diagnostic from the existence condition: the normalized L2
/// inner product |<f_x1, f_x2>| / (||f_x1|| ||f_x2||). Strictly below 1 means
/// the spatial derivatives are linearly independent. Returns the sentinel 1
/// when either derivative vanishes identically.
inline double check_linear_independence(const ScalarField& fx1, const ScalarField& fx2,
                                        const QuadratureRule& rule = QuadratureRule::gauss(2)) {
    const SpaceTimeGrid& g = fx1.grid;
    detail::check_same_grid(g, fx2.grid, "check_linear_independence");
    ElementBasis basis(g, rule);
    double ip = 0, n1 = 0, n2 = 0;
    std::size_t nodes[8];
    for (int k = 0; k + 1 < g.frames; ++k)
        for (int i = 0; i + 1 < g.height; ++i)
            for (int j = 0; j + 1 < g.width; ++j) {
                element_nodes(g, k, i, j, nodes);
                for (int q = 0; q < basis.n_quad; ++q) {
                    double v1 = 0, v2 = 0;
                    for (int l = 0; l < 8; ++l) {
                        v1 += basis.phi[q][l] * fx1.values[nodes[l]];
                        v2 += basis.phi[q][l] * fx2.values[nodes[l]];
                    }
                    ip += basis.weight[q] * v1 * v2;
                    n1 += basis.weight[q] * v1 * v1;
                    n2 += basis.weight[q] * v2 * v2;
                }
            }
    if (n1 <= 0.0 || n2 <= 0.0) return 1.0;
    return std::abs(ip) / std::sqrt(n1 * n2);
}

}  // namespace convflow
