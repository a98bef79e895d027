#include "tmem/qcore.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace tmem {

namespace {

constexpr Complex kI{0.0, 1.0};

int qubits_for_dim(Eigen::Index d, const char* what) {
    if (d < 2 || !std::has_single_bit(static_cast<unsigned long>(d)))
        throw DomainError(std::string(what) + ": dimension " + std::to_string(d) + " is not a power of two");
    return std::countr_zero(static_cast<unsigned long>(d));
}

int letter_code(char c) {
    switch (c) {
        case 'I': return 0;
        case 'X': return 1;
        case 'Y': return 2;
        case 'Z': return 3;
        default: throw DomainError(std::string("Pauli letter '") + c + "' not in {I, X, Y, Z}");
    }
}

// sigma |c> = phase * |c ^ flip> for the Pauli word with base-4 index `word`.
struct PauliAction {
    long flip = 0;
    std::vector<Complex> phase;
};

PauliAction pauli_action(long word, int n) {
    const long d = dim_of(n);
    PauliAction act;
    act.phase.assign(static_cast<std::size_t>(d), Complex{1.0, 0.0});
    for (int q = 0; q < n; ++q) {
        const int letter = static_cast<int>((word >> (2 * (n - 1 - q))) & 3);
        const long mask = 1L << (n - 1 - q);
        if (letter == 1 || letter == 2) act.flip |= mask;
        if (letter < 2) continue;
        for (long c = 0; c < d; ++c) {
            const bool one = (c & mask) != 0;
            if (letter == 2)
                act.phase[static_cast<std::size_t>(c)] *= one ? -kI : kI;
            else if (one)
                act.phase[static_cast<std::size_t>(c)] = -act.phase[static_cast<std::size_t>(c)];
        }
    }
    return act;
}

void check_square(const CMatrix& m, const char* what) {
    if (m.rows() != m.cols()) throw DomainError(std::string(what) + ": matrix is not square");
}

}  // namespace

PauliString::PauliString(std::string word) : word_(std::move(word)) {
    if (word_.empty()) throw DomainError("PauliString: empty word");
    for (char c : word_) letter_code(c);
}

PauliString PauliString::from_index(long index, int n) {
    std::string w(static_cast<std::size_t>(n), 'I');
    for (int q = n - 1; q >= 0; --q) {
        w[static_cast<std::size_t>(q)] = "IXYZ"[index & 3];
        index >>= 2;
    }
    return PauliString(std::move(w));
}

long PauliString::index() const {
    long idx = 0;
    for (char c : word_) idx = idx * 4 + letter_code(c);
    return idx;
}

const Eigen::Matrix2cd& pauli(char letter) {
    static const std::array<Eigen::Matrix2cd, 4> table = [] {
        std::array<Eigen::Matrix2cd, 4> t;
        t[0] << 1, 0, 0, 1;
        t[1] << 0, 1, 1, 0;
        t[2] << 0, -kI, kI, 0;
        t[3] << 1, 0, 0, -1;
        return t;
    }();
    return table[static_cast<std::size_t>(letter_code(letter))];
}

CMatrix pauli_operator(const PauliString& word) {
    std::vector<CMatrix> parts;
    parts.reserve(static_cast<std::size_t>(word.size()));
    for (char c : word.str()) parts.emplace_back(pauli(c));
    return kron_all(parts);
}

DensityMatrix::DensityMatrix(CMatrix rho) : rho_(std::move(rho)) {
    check_square(rho_, "DensityMatrix");
    qubits_ = qubits_for_dim(rho_.rows(), "DensityMatrix");
    const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermitianTol)
        throw DomainError("DensityMatrix: not Hermitian (deviation " + std::to_string(herm) + ")");
    const double tr = rho_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol)
        throw DomainError("DensityMatrix: trace " + std::to_string(tr) + " differs from 1");
    const CMatrix sym = 0.5 * (rho_ + rho_.adjoint());
    const double min_eig = Eigen::SelfAdjointEigenSolver<CMatrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (min_eig < kEigenTol)
        throw DomainError("DensityMatrix: negative eigenvalue " + std::to_string(min_eig));
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
    return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
    const int d = dim_of(n);
    return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::classical(const std::vector<int>& bits) {
    const int n = static_cast<int>(bits.size());
    long x = 0;
    for (int b : bits) x = 2 * x + (b ? 1 : 0);
    CMatrix rho = CMatrix::Zero(dim_of(n), dim_of(n));
    rho(x, x) = 1.0;
    return DensityMatrix(std::move(rho));
}

BlochVector bloch_vector(const Eigen::Matrix2cd& rho) {
    return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

const Eigen::Matrix2cd& ideal_projector(int lambda) {
    static const std::array<Eigen::Matrix2cd, 4> table = [] {
        std::array<Eigen::Matrix2cd, 4> t;
        t[0] << 1, 0, 0, 0;
        t[1] << 0, 0, 0, 1;
        t[2] << 0.5, 0.5, 0.5, 0.5;
        t[3] << 0.5, -0.5 * kI, 0.5 * kI, 0.5;
        return t;
    }();
    if (lambda < 0 || lambda > 3) throw DomainError("ideal_projector: index out of range");
    return table[static_cast<std::size_t>(lambda)];
}

std::string fiducial_label(int lambda) {
    static const std::array<const char*, 4> labels{"0", "1", "+", "+i"};
    return labels.at(static_cast<std::size_t>(lambda));
}

QuasiprobCoeffs::QuasiprobCoeffs(const Eigen::Vector4d& c) : c_(c) {
    if (std::abs(c_.sum() - 1.0) > kSumTol)
        throw DomainError("QuasiprobCoeffs: coefficients sum to " + std::to_string(c_.sum()));
}

QuasiprobCoeffs quasiprob_coeffs(const Eigen::Matrix2cd& hermitian) {
    const BlochVector r = bloch_vector(hermitian);
    const double tr = hermitian.trace().real();
    // Unit trace is assumed; scale by the trace so round-off stays in the coefficients.
    return QuasiprobCoeffs(Eigen::Vector4d((tr - r.x - r.y + r.z) / 2, (tr - r.x - r.y - r.z) / 2, r.x, r.y));
}

QuasiprobCoeffs quasiprob_coeffs(const DensityMatrix& rho) {
    if (rho.qubits() != 1) throw DomainError("quasiprob_coeffs: expected a single-qubit state");
    return quasiprob_coeffs(Eigen::Matrix2cd(rho.matrix()));
}

Eigen::Matrix2cd state_from_quasiprob(const QuasiprobCoeffs& c) {
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (int l = 0; l < 4; ++l) out += c[l] * ideal_projector(l);
    return out;
}

DensityMatrix tensor_states(const std::vector<DensityMatrix>& parts) {
    if (parts.empty()) throw DomainError("tensor_states: empty list");
    CMatrix out = parts.front().matrix();
    for (std::size_t i = 1; i < parts.size(); ++i) out = kron(out, parts[i].matrix());
    return DensityMatrix(std::move(out));
}

RVector pauli_vector(const CMatrix& rho) {
    check_square(rho, "pauli_vector");
    const int n = qubits_for_dim(rho.rows(), "pauli_vector");
    const long d = rho.rows();
    const long words = 1L << (2 * n);
    RVector v(words);
    for (long w = 0; w < words; ++w) {
        const PauliAction act = pauli_action(w, n);
        Complex tr{0.0, 0.0};
        for (long c = 0; c < d; ++c) tr += rho(c, c ^ act.flip) * act.phase[static_cast<std::size_t>(c)];
        v(w) = tr.real() / static_cast<double>(d);
    }
    return v;
}

CMatrix from_pauli_vector(const RVector& v) {
    const long words = v.size();
    int n = 0;
    while ((1L << (2 * n)) < words) ++n;
    if ((1L << (2 * n)) != words || n == 0) throw DomainError("from_pauli_vector: length is not 4^n");
    const long d = dim_of(n);
    CMatrix out = CMatrix::Zero(d, d);
    for (long w = 0; w < words; ++w) {
        if (v(w) == 0.0) continue;
        const PauliAction act = pauli_action(w, n);
        for (long c = 0; c < d; ++c) out(c ^ act.flip, c) += v(w) * act.phase[static_cast<std::size_t>(c)];
    }
    return out;
}

RVector effect_vector(const CMatrix& effect) {
    return pauli_vector(effect) * static_cast<double>(effect.rows());
}

CMatrix from_effect_vector(const RVector& e) {
    const CMatrix m = from_pauli_vector(e);
    return m / static_cast<double>(m.rows());
}

Ptm ptm_of_channel(const std::function<CMatrix(const CMatrix&)>& channel, int n) {
    const long words = 1L << (2 * n);
    Ptm out(words, words);
    for (long w = 0; w < words; ++w) {
        const CMatrix image = channel(pauli_operator(PauliString::from_index(w, n)));
        out.col(w) = pauli_vector(image);
    }
    return out;
}

Ptm ptm_of_unitary(const CMatrix& u) {
    check_square(u, "ptm_of_unitary");
    const int n = qubits_for_dim(u.rows(), "ptm_of_unitary");
    const double dev = (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-10) throw DomainError("ptm_of_unitary: matrix is not unitary (deviation " + std::to_string(dev) + ")");
    return ptm_of_channel([&u](const CMatrix& s) { return CMatrix(u * s * u.adjoint()); }, n);
}

CMatrix apply_ptm(const Ptm& ptm, const CMatrix& op) {
    const RVector v = pauli_vector(op);
    if (ptm.cols() != v.size()) throw DomainError("apply_ptm: dimension mismatch");
    return from_pauli_vector(ptm * v);
}

Eigen::Matrix2cd single_qubit_gate(std::string_view name) {
    const double r = 1.0 / std::numbers::sqrt2;
    Eigen::Matrix2cd g;
    if (name == "H") {
        g << r, r, r, -r;
    } else if (name == "S") {
        g << 1, 0, 0, kI;
    } else if (name == "SDG" || name == "S†") {
        g << 1, 0, 0, -kI;
    } else if (name == "T") {
        g << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4);
    } else if (name == "X" || name == "Y" || name == "Z" || name == "I") {
        g = pauli(name[0]);
    } else if (name == "GX") {
        g << r, -kI * r, -kI * r, r;
    } else if (name == "GY") {
        g << r, -r, r, r;
    } else {
        throw DomainError("unknown gate '" + std::string(name) + "'");
    }
    return g;
}

CVector apply_circuit(const std::vector<GateOp>& gates, int n) {
    if (n < 1) throw DomainError("apply_circuit: register size must be positive");
    const long d = dim_of(n);
    CVector psi = CVector::Zero(d);
    psi(0) = 1.0;
    auto check_qubit = [n](int q) {
        if (q < 0 || q >= n) throw DomainError("apply_circuit: qubit index " + std::to_string(q) + " out of range");
    };
    for (const GateOp& op : gates) {
        if (op.name == "CNOT") {
            if (op.qubits.size() != 2) throw DomainError("apply_circuit: CNOT needs two qubits");
            check_qubit(op.qubits[0]);
            check_qubit(op.qubits[1]);
            if (op.qubits[0] == op.qubits[1]) throw DomainError("apply_circuit: CNOT control equals target");
            const long cm = 1L << (n - 1 - op.qubits[0]);
            const long tm = 1L << (n - 1 - op.qubits[1]);
            for (long i = 0; i < d; ++i)
                if ((i & cm) && !(i & tm)) std::swap(psi(i), psi(i | tm));
            continue;
        }
        const Eigen::Matrix2cd g = single_qubit_gate(op.name);
        if (op.qubits.size() != 1) throw DomainError("apply_circuit: gate " + op.name + " needs one qubit");
        check_qubit(op.qubits[0]);
        const long m = 1L << (n - 1 - op.qubits[0]);
        for (long i = 0; i < d; ++i) {
            if (i & m) continue;
            const Complex a = psi(i), b = psi(i | m);
            psi(i) = g(0, 0) * a + g(0, 1) * b;
            psi(i | m) = g(1, 0) * a + g(1, 1) * b;
        }
    }
    return psi;
}

DiagonalPovm::DiagonalPovm(RMatrix response) : response_(std::move(response)) {
    if (response_.rows() != response_.cols()) throw DomainError("DiagonalPovm: response must be square");
    qubits_ = qubits_for_dim(response_.rows(), "DiagonalPovm");
    if (response_.minCoeff() < 0.0) throw DomainError("DiagonalPovm: negative response entry");
    for (Eigen::Index s = 0; s < response_.cols(); ++s)
        if (std::abs(response_.col(s).sum() - 1.0) > kColumnTol)
            throw DomainError("DiagonalPovm: column " + std::to_string(s) + " does not sum to 1");
}

DiagonalPovm DiagonalPovm::identity(int n) {
    return DiagonalPovm(RMatrix::Identity(dim_of(n), dim_of(n)));
}

GeneralPovm::GeneralPovm(std::vector<CMatrix> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) throw DomainError("GeneralPovm: no elements");
    const Eigen::Index d = elements_.front().rows();
    qubits_ = qubits_for_dim(d, "GeneralPovm");
    if (static_cast<Eigen::Index>(elements_.size()) != d)
        throw DomainError("GeneralPovm: expected one element per classical outcome");
    CMatrix total = CMatrix::Zero(d, d);
    for (const CMatrix& e : elements_) {
        if (e.rows() != d || e.cols() != d) throw DomainError("GeneralPovm: element dimension mismatch");
        if ((e - e.adjoint()).cwiseAbs().maxCoeff() > kTol) throw DomainError("GeneralPovm: element not Hermitian");
        const double min_eig = Eigen::SelfAdjointEigenSolver<CMatrix>(e, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        if (min_eig < -kTol) throw DomainError("GeneralPovm: element not positive semidefinite");
        total += e;
    }
    if ((total - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kTol)
        throw DomainError("GeneralPovm: elements do not sum to the identity");
}

int Povm::qubits() const {
    return std::visit([](const auto& p) -> int {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, IdealPovm>)
            return p.qubits;
        else
            return p.qubits();
    }, rep_);
}

RVector Povm::probabilities(const CMatrix& rho) const {
    if (rho.rows() != dim() || rho.cols() != dim())
        throw DomainError("Povm: state dimension " + std::to_string(rho.rows()) + " does not match POVM dimension " +
                          std::to_string(dim()));
    const RVector diag = rho.diagonal().real();
    if (std::holds_alternative<IdealPovm>(rep_)) return diag;
    if (const auto* dp = std::get_if<DiagonalPovm>(&rep_)) return dp->response() * diag;
    const auto& elements = std::get<GeneralPovm>(rep_).elements();
    RVector p(dim());
    for (int x = 0; x < dim(); ++x)
        p(x) = (elements[static_cast<std::size_t>(x)].cwiseProduct(rho.transpose())).sum().real();
    return p;
}

double Povm::diagonal_element(int x, int s) const {
    if (std::holds_alternative<IdealPovm>(rep_)) return x == s ? 1.0 : 0.0;
    if (const auto* dp = std::get_if<DiagonalPovm>(&rep_)) return dp->response()(x, s);
    return std::get<GeneralPovm>(rep_).elements()[static_cast<std::size_t>(x)](s, s).real();
}

CMatrix Povm::marginal_zero_effect(int qubit) const {
    const int n = qubits();
    if (qubit < 0 || qubit >= n) throw DomainError("marginal_zero_effect: qubit out of range");
    const int d = dim();
    CMatrix out = CMatrix::Zero(d, d);
    if (const auto* gp = std::get_if<GeneralPovm>(&rep_)) {
        for (int x = 0; x < d; ++x)
            if (bit_of(x, qubit, n) == 0) out += gp->elements()[static_cast<std::size_t>(x)];
        return out;
    }
    for (int s = 0; s < d; ++s) {
        double mass = 0.0;
        for (int x = 0; x < d; ++x)
            if (bit_of(x, qubit, n) == 0) mass += diagonal_element(x, s);
        out(s, s) = mass;
    }
    return out;
}

ProbabilityDistribution::ProbabilityDistribution(RVector p) : p_(std::move(p)) {
    if (p_.size() == 0) throw DomainError("ProbabilityDistribution: empty");
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
        if (!std::isfinite(p_(i))) throw DomainError("ProbabilityDistribution: non-finite entry");
        if (p_(i) < -kNegTol)
            throw DomainError("ProbabilityDistribution: negative entry " + std::to_string(p_(i)));
        if (p_(i) < 0.0) p_(i) = 0.0;
    }
    if (std::abs(p_.sum() - 1.0) > kSumTol)
        throw DomainError("ProbabilityDistribution: entries sum to " + std::to_string(p_.sum()));
}

CMatrix basis_change(const PauliString& word) {
    std::vector<CMatrix> parts;
    const Eigen::Matrix2cd h = single_qubit_gate("H");
    const Eigen::Matrix2cd hsdg = h * single_qubit_gate("SDG");
    for (char c : word.str()) {
        if (c == 'X')
            parts.emplace_back(h);
        else if (c == 'Y')
            parts.emplace_back(hsdg);
        else
            parts.emplace_back(Eigen::Matrix2cd::Identity());
    }
    return kron_all(parts);
}

double parity_expectation(const RVector& p, const PauliString& word) {
    const int n = word.size();
    if (p.size() != dim_of(n)) throw DomainError("parity_expectation: distribution size does not match word");
    long mask = 0;
    for (int q = 0; q < n; ++q)
        if (word[q] != 'I') mask |= 1L << (n - 1 - q);
    double e = 0.0;
    for (long x = 0; x < p.size(); ++x) e += (std::popcount(static_cast<unsigned long>(x & mask)) & 1) ? -p(x) : p(x);
    return e;
}

PauliMeasurement measure_pauli(const DensityMatrix& rho, const PauliString& word, const Povm& povm) {
    if (word.size() != rho.qubits()) throw DomainError("measure_pauli: word length does not match the register");
    if (povm.dim() != rho.dim()) throw DomainError("measure_pauli: state and POVM dimensions differ");
    const CMatrix u = basis_change(word);
    const CMatrix rotated = u * rho.matrix() * u.adjoint();
    ProbabilityDistribution dist(povm.probabilities(rotated));
    const double e = parity_expectation(dist.vector(), word);
    return {std::move(dist), e};
}

std::string bitstring(long x, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int q = 0; q < n; ++q)
        if (bit_of(x, q, n)) s[static_cast<std::size_t>(q)] = '1';
    return s;
}

}  // namespace tmem
