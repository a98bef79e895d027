#pragma once

// Column-stochastic matrices and Euclidean projection onto the probability simplex.

#include "tmem/types.hpp"

namespace tmem {

/// Rows index the observed outcome x, columns the prepared classical word x'.
class ColumnStochasticMatrix {
public:
    static constexpr double kColumnTol = 1e-10;
    static constexpr double kNegTol = 1e-12;

    explicit ColumnStochasticMatrix(RMatrix m);

    static ColumnStochasticMatrix identity(int dim) { return ColumnStochasticMatrix(RMatrix::Identity(dim, dim)); }

    const RMatrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    double operator()(int x, int xp) const { return m_(x, xp); }

private:
    RMatrix m_;
};

/// argmin_{p in simplex} ||p - v||_2 (sort-based, O(k log k)).
RVector project_simplex(const RVector& v);

/// Each column projected onto the simplex; the Frobenius-nearest column-stochastic matrix.
ColumnStochasticMatrix project_column_stochastic(const RMatrix& m);

}  // namespace tmem
