#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "convflow/grid.hpp"
#include "convflow/sparse.hpp"

namespace convflow {

enum class Preconditioner { none, jacobi };

struct SolverConfig {
    double rel_tolerance = 1e-8;
    double abs_tolerance = 1e-12;
    std::size_t max_iterations = 0;  // 0: 10 * unknowns, capped at 50000
    Preconditioner preconditioner = Preconditioner::jacobi;

    std::size_t iteration_cap(std::size_t unknowns) const {
        if (max_iterations > 0) return max_iterations;
        return std::min<std::size_t>(10 * unknowns, 50000);
    }
};

struct SolveReport {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    double wall_seconds = 0.0;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Preconditioned CG on a generic SPD operator. apply(x, y) computes y = A x.
/// inv_diag may be empty (no preconditioning). x holds the initial guess.
inline SolveReport cg(const std::function<void(const std::vector<double>&,
                                               std::vector<double>&)>& apply,
                      const std::vector<double>& b, std::vector<double>& x,
                      const std::vector<double>& inv_diag, const SolverConfig& cfg) {
    auto t_start = std::chrono::steady_clock::now();
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), ap(n);

    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    double bnorm = std::sqrt(dot(b, b));
    double denom = std::max(bnorm, 1e-300);

    auto precond = [&](const std::vector<double>& v, std::vector<double>& out) {
        if (inv_diag.empty())
            out = v;
        else
            for (std::size_t i = 0; i < n; ++i) out[i] = inv_diag[i] * v[i];
    };

    SolveReport rep;
    double rnorm = std::sqrt(dot(r, r));
    precond(r, z);
    p = z;
    double rz = dot(r, z);
    const std::size_t max_it = cfg.iteration_cap(n);
    while (rnorm / denom > cfg.rel_tolerance && rnorm > cfg.abs_tolerance &&
           rep.iterations < max_it) {
        apply(p, ap);
        double pap = dot(p, ap);
        if (!(pap > 0.0)) {
            if (pap == 0.0) break;  // exact kernel direction, nothing left to do
            throw std::runtime_error("cg: p'Ap <= 0, operator is not PSD");
        }
        double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(r, z);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rnorm = std::sqrt(dot(r, r));
        if (!std::isfinite(rnorm))
            throw std::runtime_error("cg: non-finite residual, check the assembled system");
        ++rep.iterations;
    }
    rep.relative_residual = rnorm / denom;
    rep.converged = rep.relative_residual <= cfg.rel_tolerance || rnorm <= cfg.abs_tolerance;
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

inline std::vector<double> inverse_diagonal(const std::vector<double>& d) {
    std::vector<double> inv(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) inv[i] = d[i] != 0.0 ? 1.0 / d[i] : 1.0;
    return inv;
}

}  // namespace detail

/// CG for a single CSR system (used for the mass-matrix projections).
inline SolveReport cg_solve(const CsrMatrix& a, const std::vector<double>& b,
                            std::vector<double>& x, const SolverConfig& cfg = {}) {
    if (x.size() != a.cols) x.assign(a.cols, 0.0);
    std::vector<double> inv_diag;
    if (cfg.preconditioner == Preconditioner::jacobi)
        inv_diag = detail::inverse_diagonal(a.diagonal());
    return detail::cg([&](const std::vector<double>& v,
                          std::vector<double>& y) { a.apply(v, y); },
                      b, x, inv_diag, cfg);
}

/// CG for the coupled 2x2-block system. The result's constant-mode component
/// equals that of the initial guess for singular-consistent (pure Neumann)
/// systems. Symmetry of the operator is validated once with a random-vector
/// test before iterating.
inline std::pair<VectorField, SolveReport> cg_solve(const BlockSparseSystem& sys,
                                                    const VectorField& x0,
                                                    const SolverConfig& cfg = {}) {
    const std::size_t n = sys.block_size();
    if (x0.u1.size() != n || x0.u2.size() != n)
        throw std::invalid_argument("cg_solve: initial guess size mismatch");

    {  // cheap symmetry check: x'Ay == y'Ax for one pseudo-random pair
        std::vector<double> xa(n), xb(n), ya(n), yb(n), r1(n), r2(n), s1(n), s2(n);
        std::uint64_t state = 0x9e3779b97f4a7c15ull;
        auto next = [&state]() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            return static_cast<double>(state % 2000001) * 1e-6 - 1.0;
        };
        for (std::size_t i = 0; i < n; ++i) {
            xa[i] = next();
            xb[i] = next();
            ya[i] = next();
            yb[i] = next();
        }
        sys.apply(ya, yb, r1, r2);
        double xAy = detail::dot(xa, r1) + detail::dot(xb, r2);
        sys.apply(xa, xb, s1, s2);
        double yAx = detail::dot(ya, s1) + detail::dot(yb, s2);
        double scale = std::max({std::abs(xAy), std::abs(yAx), 1e-300});
        if (std::abs(xAy - yAx) / scale > 1e-8)
            throw std::runtime_error("cg_solve: block system is not symmetric");
    }

    std::vector<double> x(2 * n), b(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = x0.u1[i];
        x[n + i] = x0.u2[i];
        b[i] = sys.b1[i];
        b[n + i] = sys.b2[i];
        if (!std::isfinite(b[i]) || !std::isfinite(b[n + i]))
            throw std::runtime_error("cg_solve: non-finite right-hand side");
    }

    std::vector<double> inv_diag;
    if (cfg.preconditioner == Preconditioner::jacobi) {
        auto d1 = sys.a11.diagonal();
        auto d2 = sys.a22.diagonal();
        inv_diag.resize(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            inv_diag[i] = d1[i] != 0.0 ? 1.0 / d1[i] : 1.0;
            inv_diag[n + i] = d2[i] != 0.0 ? 1.0 / d2[i] : 1.0;
        }
    }

    std::vector<double> x1(n), x2(n), y1(n), y2(n);
    auto apply = [&](const std::vector<double>& v, std::vector<double>& y) {
        std::copy(v.begin(), v.begin() + n, x1.begin());
        std::copy(v.begin() + n, v.end(), x2.begin());
        sys.apply(x1, x2, y1, y2);
        y.resize(2 * n);
        std::copy(y1.begin(), y1.end(), y.begin());
        std::copy(y2.begin(), y2.end(), y.begin() + n);
    };

    SolveReport rep = detail::cg(apply, b, x, inv_diag, cfg);

    VectorField out(x0.grid);
    for (std::size_t i = 0; i < n; ++i) {
        out.u1[i] = x[i];
        out.u2[i] = x[n + i];
    }
    return {std::move(out), rep};
}

}  // namespace convflow
