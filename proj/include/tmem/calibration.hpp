#pragma once

// Calibration artifacts: fiducial states and L matrices, the T matrix, the
// 4^n-circuit calibration table and the Gamma matrix assembled from it.
//
// lambda-words are enumerated as base-4 numbers with {0, 1, +, +i} -> {0, 1, 2, 3}
// and qubit 0 as the most significant digit.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmem/errormodel.hpp"
#include "tmem/stochastic.hpp"

namespace tmem {

/// Row lambda holds the quasiprobability coefficients of the noisy fiducial rho_lambda.
class LMatrix {
public:
    static constexpr double kRowTol = 1e-10;

    explicit LMatrix(const Eigen::Matrix4d& m);
    static LMatrix identity() { return LMatrix(Eigen::Matrix4d::Identity()); }

    const Eigen::Matrix4d& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }
    double condition_number() const;

private:
    Eigen::Matrix4d m_;
};

/// Sample count per circuit, or exact probabilities.
struct Shots {
    std::optional<long> count;

    static Shots exact() { return {}; }
    static Shots of(long n);
    bool is_exact() const { return !count.has_value(); }
    std::string str() const;
};

struct CountVector {
    std::vector<long> counts;
    long shots = 0;
};

class CalibrationTable {
public:
    CalibrationTable(int n, std::vector<ProbabilityDistribution> rows);

    int qubits() const { return n_; }
    long words() const { return static_cast<long>(rows_.size()); }
    const ProbabilityDistribution& at(long lambda_word) const { return rows_.at(static_cast<std::size_t>(lambda_word)); }
    /// words() x 2^n, row per lambda-word.
    RMatrix as_matrix() const;

private:
    int n_;
    std::vector<ProbabilityDistribution> rows_;
};

/// "0_+_+i_1" style label for a lambda-word index.
std::string lambda_word_label(long word, int n);
/// Lambda-word index whose digits are the bits of the classical word x.
long classical_lambda_word(long x, int n);

/// {rho0, G_x^2 rho0, G_y rho0, G_x^3 rho0} propagated through the noisy PTMs.
std::array<DensityMatrix, 4> fiducial_states(const SingleQubitNoise& sq);

LMatrix compute_L(const std::array<DensityMatrix, 4>& fiducials);

/// Throws NumericalError naming the qubit when cond(L) exceeds the bound.
Eigen::Matrix4d invert_L(const LMatrix& L, int qubit = -1, double max_condition = 1e6);

CountVector sample_distribution(const ProbabilityDistribution& p, long shots, Rng& rng);
/// Exact mode returns p unchanged; otherwise counts / shots of a multinomial draw.
ProbabilityDistribution estimate_distribution(const ProbabilityDistribution& p, const Shots& shots, Rng& rng);

/// Column x' is the measured distribution for prepared_classical_state(x').
ColumnStochasticMatrix measure_T(const ErrorModel& model, const Shots& shots, std::uint64_t seed);

CalibrationTable measure_calibration_table(const ErrorModel& model, const Shots& shots, std::uint64_t seed);

/// W(x', lambda) = prod_i (L_i^-1)_{x'_i, lambda_i}; 2^n x 4^n.
RMatrix classical_inverse_weights(const std::vector<Eigen::Matrix4d>& l_inverses);

/// Gamma-hat before projection: table^T W^T.
RMatrix assemble_gamma_raw(const std::vector<LMatrix>& Ls, const CalibrationTable& table);
ColumnStochasticMatrix assemble_gamma(const std::vector<LMatrix>& Ls, const CalibrationTable& table);

/// T read from the classical lambda-words of the table.
ColumnStochasticMatrix t_from_table(const CalibrationTable& table);

}  // namespace tmem
