#pragma once

// Dense small-register quantum primitives: Pauli words, density matrices,
// the {0, 1, +, +i} projector basis, Pauli transfer matrices, statevector
// circuits and POVM-based Pauli measurement.
//
// Bit ordering: outcome x in {0,1}^n is stored at index sum_i x_i 2^(n-1-i),
// i.e. qubit 0 is the most significant bit. Kronecker products are taken in
// qubit order, so kron(A_0, ..., A_{n-1}) matches this convention.

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tmem/types.hpp"

namespace tmem {

/// A word over {I, X, Y, Z}. Letter i acts on qubit i.
class PauliString {
public:
    explicit PauliString(std::string word);

    /// Inverse of index(): base-4 digits with I=0, X=1, Y=2, Z=3.
    static PauliString from_index(long index, int n);

    const std::string& str() const { return word_; }
    int size() const { return static_cast<int>(word_.size()); }
    char operator[](int i) const { return word_[static_cast<std::size_t>(i)]; }
    long index() const;

    friend bool operator==(const PauliString& a, const PauliString& b) = default;
    friend auto operator<=>(const PauliString& a, const PauliString& b) = default;

private:
    std::string word_;
};

template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedB>& b) {
    Matrix<typename DerivedA::Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

template <typename Scalar>
Matrix<Scalar> kron_all(const std::vector<Matrix<Scalar>>& parts) {
    if (parts.empty()) throw DomainError("kron_all: empty factor list");
    Matrix<Scalar> out = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) out = kron(out, parts[i]);
    return out;
}

/// Single-qubit Pauli matrix for 'I', 'X', 'Y' or 'Z'.
const Eigen::Matrix2cd& pauli(char letter);

/// Tensor product of the word's Pauli matrices.
CMatrix pauli_operator(const PauliString& word);

/// Validated n-qubit state: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
public:
    static constexpr double kHermitianTol = 1e-12;
    static constexpr double kTraceTol = 1e-12;
    static constexpr double kEigenTol = -1e-10;

    explicit DensityMatrix(CMatrix rho);

    static DensityMatrix pure(const CVector& psi);
    static DensityMatrix maximally_mixed(int n);
    /// |x><x| for the bitstring x (qubit 0 first).
    static DensityMatrix classical(const std::vector<int>& bits);

    const CMatrix& matrix() const { return rho_; }
    int dim() const { return static_cast<int>(rho_.rows()); }
    int qubits() const { return qubits_; }

private:
    CMatrix rho_;
    int qubits_;
};

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

BlochVector bloch_vector(const Eigen::Matrix2cd& rho);

/// Index into the {pi_0, pi_1, pi_+, pi_+i} projector basis.
enum class Fiducial : int { Zero = 0, One = 1, Plus = 2, PlusI = 3 };

const Eigen::Matrix2cd& ideal_projector(int lambda);
std::string fiducial_label(int lambda);

/// Real expansion coefficients over {pi_0, pi_1, pi_+, pi_+i}; they sum to 1.
class QuasiprobCoeffs {
public:
    static constexpr double kSumTol = 1e-9;

    explicit QuasiprobCoeffs(const Eigen::Vector4d& c);

    double operator[](int lambda) const { return c_(lambda); }
    const Eigen::Vector4d& vector() const { return c_; }

private:
    Eigen::Vector4d c_;
};

QuasiprobCoeffs quasiprob_coeffs(const DensityMatrix& rho);
/// Same expansion for any unit-trace Hermitian 2x2 operator.
QuasiprobCoeffs quasiprob_coeffs(const Eigen::Matrix2cd& hermitian);

/// c_0 pi_0 + c_1 pi_1 + c_+ pi_+ + c_+i pi_+i. May be non-PSD.
Eigen::Matrix2cd state_from_quasiprob(const QuasiprobCoeffs& c);

DensityMatrix tensor_states(const std::vector<DensityMatrix>& parts);

/// |rho>>_sigma = tr(rho sigma) / d over all 4^n Pauli words.
RVector pauli_vector(const CMatrix& rho);
CMatrix from_pauli_vector(const RVector& v);
/// <<E|_sigma = tr(E sigma); with pauli_vector this gives <<E|rho>> = tr(E rho).
RVector effect_vector(const CMatrix& effect);
CMatrix from_effect_vector(const RVector& e);

Ptm ptm_of_channel(const std::function<CMatrix(const CMatrix&)>& channel, int n);
/// (R_U)_{sigma sigma'} = tr(sigma U sigma' U^dagger) / d. Throws on non-unitary input.
Ptm ptm_of_unitary(const CMatrix& u);
/// Applies a PTM to an operator through its Pauli vector.
CMatrix apply_ptm(const Ptm& ptm, const CMatrix& op);

struct GateOp {
    std::string name;
    std::vector<int> qubits;
};

/// Named single-qubit gate: H, S, T, SDG (or S†), X, Y, Z, GX = exp(-i pi X/4), GY = exp(-i pi Y/4).
Eigen::Matrix2cd single_qubit_gate(std::string_view name);

/// Runs the circuit on |0...0>. Supports the single-qubit gates above and CNOT (control, target).
CVector apply_circuit(const std::vector<GateOp>& gates, int n);

/// Column-stochastic response matrix R(x|s) = E_x[s, s] of a POVM diagonal in the classical basis.
class DiagonalPovm {
public:
    static constexpr double kColumnTol = 1e-12;

    explicit DiagonalPovm(RMatrix response);
    static DiagonalPovm identity(int n);

    const RMatrix& response() const { return response_; }
    int qubits() const { return qubits_; }

private:
    RMatrix response_;
    int qubits_;
};

class GeneralPovm {
public:
    static constexpr double kTol = 1e-10;

    explicit GeneralPovm(std::vector<CMatrix> elements);

    const std::vector<CMatrix>& elements() const { return elements_; }
    int qubits() const { return qubits_; }

private:
    std::vector<CMatrix> elements_;
    int qubits_;
};

struct IdealPovm {
    int qubits;
};

/// Measurement model: ideal projective, diagonal, or general.
class Povm {
public:
    Povm(IdealPovm p) : rep_(p) {}
    Povm(DiagonalPovm p) : rep_(std::move(p)) {}
    Povm(GeneralPovm p) : rep_(std::move(p)) {}

    static Povm ideal(int n) { return Povm(IdealPovm{n}); }

    int qubits() const;
    int dim() const { return dim_of(qubits()); }

    /// tr(E_x rho) for every outcome x.
    RVector probabilities(const CMatrix& rho) const;
    /// <s|E_x|s>.
    double diagonal_element(int x, int s) const;
    /// Sum over outcomes with bit `qubit` equal to 0: the marginal E_0 for that qubit.
    CMatrix marginal_zero_effect(int qubit) const;

    const auto& rep() const { return rep_; }

private:
    std::variant<IdealPovm, DiagonalPovm, GeneralPovm> rep_;
};

/// Nonnegative vector summing to one. Entries in (-kNegTol, 0) are clamped to 0.
class ProbabilityDistribution {
public:
    static constexpr double kSumTol = 1e-10;
    static constexpr double kNegTol = 1e-12;

    explicit ProbabilityDistribution(RVector p);

    const RVector& vector() const { return p_; }
    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_(i); }

private:
    RVector p_;
};

/// prod_i U_i with H for X, H S^dagger for Y, identity for Z and I.
CMatrix basis_change(const PauliString& word);

/// sum_x p(x) (-1)^(number of 1-bits of x at non-I positions of the word).
double parity_expectation(const RVector& p, const PauliString& word);

struct PauliMeasurement {
    ProbabilityDistribution distribution;
    double expectation;
};

PauliMeasurement measure_pauli(const DensityMatrix& rho, const PauliString& word, const Povm& povm);

/// Bit i of x for an n-qubit register (qubit 0 most significant).
inline int bit_of(long x, int qubit, int n) { return static_cast<int>((x >> (n - 1 - qubit)) & 1); }
std::string bitstring(long x, int n);

}  // namespace tmem
