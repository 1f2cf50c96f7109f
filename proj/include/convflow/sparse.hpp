#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "convflow/grid.hpp"

namespace convflow {

/// Compressed sparse rows, fixed pattern after construction.
struct CsrMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col;
    std::vector<double> val;

    CsrMatrix() = default;

    /// Build from per-row sorted column index lists, values zeroed.
    static CsrMatrix from_pattern(std::size_t rows, std::size_t cols,
                                  const std::vector<std::vector<std::size_t>>& pattern) {
        CsrMatrix m;
        m.rows = rows;
        m.cols = cols;
        m.row_ptr.resize(rows + 1, 0);
        for (std::size_t r = 0; r < rows; ++r)
            m.row_ptr[r + 1] = m.row_ptr[r] + pattern[r].size();
        m.col.reserve(m.row_ptr[rows]);
        for (std::size_t r = 0; r < rows; ++r)
            m.col.insert(m.col.end(), pattern[r].begin(), pattern[r].end());
        m.val.assign(m.col.size(), 0.0);
        return m;
    }

    std::size_t nnz() const { return val.size(); }

    /// Index into val for entry (r,c); the entry must exist in the pattern.
    std::size_t entry(std::size_t r, std::size_t c) const {
        auto first = col.begin() + row_ptr[r];
        auto last = col.begin() + row_ptr[r + 1];
        auto it = std::lower_bound(first, last, c);
        if (it == last || *it != c)
            throw std::out_of_range("CsrMatrix: entry not in pattern");
        return static_cast<std::size_t>(it - col.begin());
    }

    void add(std::size_t r, std::size_t c, double v) { val[entry(r, c)] += v; }

    double get(std::size_t r, std::size_t c) const {
        auto first = col.begin() + row_ptr[r];
        auto last = col.begin() + row_ptr[r + 1];
        auto it = std::lower_bound(first, last, c);
        return (it == last || *it != c) ? 0.0 : val[it - col.begin()];
    }

    /// y = A x (y overwritten). Row-wise, deterministic.
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        if (x.size() != cols) throw std::invalid_argument("CsrMatrix::apply: dim mismatch");
        y.assign(rows, 0.0);
        accumulate(x, y);
    }

    /// y += A x.
    void accumulate(const std::vector<double>& x, std::vector<double>& y) const {
#pragma omp parallel for schedule(static)
        for (long long r = 0; r < static_cast<long long>(rows); ++r) {
            double acc = y[r];
            for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
                acc += val[p] * x[col[p]];
            y[r] = acc;
        }
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) d[r] = get(r, r);
        return d;
    }

    CsrMatrix transposed() const {
        std::vector<std::vector<std::size_t>> pat(cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
                pat[col[p]].push_back(r);
        CsrMatrix t = from_pattern(cols, rows, pat);
        std::vector<std::size_t> fill(cols, 0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
                std::size_t c = col[p];
                t.val[t.row_ptr[c] + fill[c]++] = val[p];
            }
        return t;
    }
};

/// Sparsity pattern of the 27-node space-time neighborhood on a grid.
inline std::vector<std::vector<std::size_t>> grid_pattern(const SpaceTimeGrid& g) {
    std::vector<std::vector<std::size_t>> pat(g.nodes());
    for (int k = 0; k < g.frames; ++k)
        for (int i = 0; i < g.height; ++i)
            for (int j = 0; j < g.width; ++j) {
                auto& row = pat[g.index(k, i, j)];
                for (int dk = -1; dk <= 1; ++dk)
                    for (int di = -1; di <= 1; ++di)
                        for (int dj = -1; dj <= 1; ++dj) {
                            int kk = k + dk, ii = i + di, jj = j + dj;
                            if (kk < 0 || kk >= g.frames || ii < 0 || ii >= g.height ||
                                jj < 0 || jj >= g.width)
                                continue;
                            row.push_back(g.index(kk, ii, jj));
                        }
                std::sort(row.begin(), row.end());
            }
    return pat;
}

/// Symmetric 2x2-block operator with right-hand side, for the coupled
/// Euler-Lagrange system in (u1, u2).
struct BlockSparseSystem {
    CsrMatrix a11, a12, a21, a22;
    std::vector<double> b1, b2;

    std::size_t block_size() const { return a11.rows; }

    /// y = A x on stacked vectors (x1; x2).
    void apply(const std::vector<double>& x1, const std::vector<double>& x2,
               std::vector<double>& y1, std::vector<double>& y2) const {
        a11.apply(x1, y1);
        a12.accumulate(x2, y1);
        a21.apply(x1, y2);
        a22.accumulate(x2, y2);
    }
};

}  // namespace convflow
