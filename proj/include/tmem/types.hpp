#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tmem {

using Complex = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrix = Matrix<Complex>;
using CVector = Vector<Complex>;
using RMatrix = Matrix<double>;
using RVector = Vector<double>;

// Pauli transfer matrices are real 4^n x 4^n matrices indexed by Pauli words
// with I=0, X=1, Y=2, Z=3 and qubit 0 as the most significant base-4 digit.
using Ptm = RMatrix;

// Precondition violations and malformed inputs.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failures: singular L matrices, solver non-convergence, GST failure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline int dim_of(int n) { return 1 << n; }

}  // namespace tmem
