// Test-only dense linear algebra oracles, independent of the sparse/CG path.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "convflow/sparse.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const convflow::CsrMatrix& m) {
    Dense d(m.rows, std::vector<double>(m.cols, 0.0));
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p)
            d[r][m.col[p]] += m.val[p];
    return d;
}

/// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(Dense a, std::vector<double> b) {
    const std::size_t n = a.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
        if (std::abs(a[piv][k]) < 1e-14) throw std::runtime_error("dense_solve: singular");
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t r = k + 1; r < n; ++r) {
            double f = a[r][k] / a[k][k];
            for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
            b[r] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t c = k + 1; c < n; ++c) s -= a[k][c] * x[c];
        x[k] = s / a[k][k];
    }
    return x;
}

inline Dense kron(const Dense& a, const Dense& b) {
    std::size_t ar = a.size(), ac = a[0].size(), br = b.size(), bc = b[0].size();
    Dense out(ar * br, std::vector<double>(ac * bc, 0.0));
    for (std::size_t i = 0; i < ar; ++i)
        for (std::size_t j = 0; j < ac; ++j)
            for (std::size_t p = 0; p < br; ++p)
                for (std::size_t q = 0; q < bc; ++q)
                    out[i * br + p][j * bc + q] = a[i][j] * b[p][q];
    return out;
}

/// 1D linear FE mass matrix on n nodes, spacing h.
inline Dense mass_1d(int n, double h) {
    Dense m(n, std::vector<double>(n, 0.0));
    for (int e = 0; e + 1 < n; ++e) {
        m[e][e] += h / 3.0;
        m[e + 1][e + 1] += h / 3.0;
        m[e][e + 1] += h / 6.0;
        m[e + 1][e] += h / 6.0;
    }
    return m;
}

/// 1D linear FE stiffness matrix on n nodes, spacing h.
inline Dense stiffness_1d(int n, double h) {
    Dense k(n, std::vector<double>(n, 0.0));
    for (int e = 0; e + 1 < n; ++e) {
        k[e][e] += 1.0 / h;
        k[e + 1][e + 1] += 1.0 / h;
        k[e][e + 1] -= 1.0 / h;
        k[e + 1][e] -= 1.0 / h;
    }
    return k;
}

inline Dense add(const Dense& a, const Dense& b) {
    Dense out = a;
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < a[0].size(); ++c) out[r][c] += b[r][c];
    return out;
}

}  // namespace oracle
