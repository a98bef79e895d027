#include "tmem/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace tmem {

ColumnStochasticMatrix::ColumnStochasticMatrix(RMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw DomainError("ColumnStochasticMatrix: matrix must be square");
    for (Eigen::Index j = 0; j < m_.cols(); ++j) {
        for (Eigen::Index i = 0; i < m_.rows(); ++i) {
            if (!std::isfinite(m_(i, j))) throw DomainError("ColumnStochasticMatrix: non-finite entry");
            if (m_(i, j) < -kNegTol)
                throw DomainError("ColumnStochasticMatrix: negative entry at (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
            if (m_(i, j) < 0.0) m_(i, j) = 0.0;
        }
        if (std::abs(m_.col(j).sum() - 1.0) > kColumnTol)
            throw DomainError("ColumnStochasticMatrix: column " + std::to_string(j) + " sums to " +
                              std::to_string(m_.col(j).sum()));
    }
}

RVector project_simplex(const RVector& v) {
    const Eigen::Index k = v.size();
    if (k == 0) throw DomainError("project_simplex: empty vector");
    std::vector<double> u(v.data(), v.data() + k);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0, theta = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        cumsum += u[static_cast<std::size_t>(i)];
        const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (u[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
    }
    return (v.array() - theta).max(0.0).matrix();
}

ColumnStochasticMatrix project_column_stochastic(const RMatrix& m) {
    if (m.rows() != m.cols()) throw DomainError("project_column_stochastic: matrix must be square");
    RMatrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = project_simplex(m.col(j));
    return ColumnStochasticMatrix(std::move(out));
}

}  // namespace tmem
