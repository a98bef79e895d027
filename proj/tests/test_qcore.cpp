#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tmem/errormodel.hpp"

using namespace tmem;

namespace {

CMatrix random_density(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    const int d = dim_of(n);
    CMatrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
    CMatrix rho = a * a.adjoint();
    return rho / rho.trace();
}

CMatrix random_unitary(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    const int d = dim_of(n);
    CMatrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
    return Eigen::HouseholderQR<CMatrix>(a).householderQ();
}

}  // namespace

TEST_CASE("pauli words index in base 4 with qubit 0 most significant") {
    CHECK(PauliString("IXYZ").index() == 0 * 64 + 1 * 16 + 2 * 4 + 3);
    for (long i = 0; i < 256; ++i) {
        const PauliString w = PauliString::from_index(i, 4);
        CHECK(w.index() == i);
        CHECK(w.str() == oracle::word_of(i, 4));
    }
    CHECK_THROWS_AS(PauliString("XQ"), DomainError);
}

TEST_CASE("pauli operators match explicit Kronecker products") {
    for (long i = 0; i < 64; ++i) {
        const std::string w = oracle::word_of(i, 3);
        CHECK((pauli_operator(PauliString(w)) - oracle::pauli_word(w)).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("pauli vectors agree with the trace formula and invert") {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 3; ++n)
        for (int t = 0; t < 5; ++t) {
            const CMatrix rho = random_density(n, rng);
            const RVector v = pauli_vector(rho);
            CHECK((v - oracle::pauli_vector(rho, n)).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((from_pauli_vector(v) - rho).cwiseAbs().maxCoeff() < 1e-13);
            // <<E|rho>> = tr(E rho)
            const CMatrix e = random_density(n, rng);
            CHECK(std::abs(effect_vector(e).dot(v) - (e * rho).trace().real()) < 1e-13);
            CHECK((from_effect_vector(effect_vector(e)) - e).cwiseAbs().maxCoeff() < 1e-13);
        }
}

TEST_CASE("unitary PTMs match the oracle and are orthogonal and trace preserving") {
    std::mt19937_64 rng(12);
    for (int n = 1; n <= 2; ++n) {
        const CMatrix u = random_unitary(n, rng);
        const Ptm r = ptm_of_unitary(u);
        CHECK((r - oracle::ptm_of_unitary(u, n)).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((r.transpose() * r - RMatrix::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(r(0, 0) - 1.0) < 1e-13);
        CHECK(r.row(0).tail(r.cols() - 1).cwiseAbs().maxCoeff() < 1e-13);
        const CMatrix rho = random_density(n, rng);
        CHECK((apply_ptm(r, rho) - u * rho * u.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
    }
    CMatrix bad = CMatrix::Identity(2, 2);
    bad(0, 0) = 2.0;
    CHECK_THROWS_AS(ptm_of_unitary(bad), DomainError);
}

TEST_CASE("pi/2 gates are exp(-i pi P / 4)") {
    CHECK((single_qubit_gate("GX") - oracle::rotation('X', M_PI / 2)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((single_qubit_gate("GY") - oracle::rotation('Y', M_PI / 2)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(single_qubit_gate("Q"), DomainError);
}

TEST_CASE("density matrix validation") {
    CMatrix m = CMatrix::Identity(2, 2) * 0.5;
    CHECK_NOTHROW(DensityMatrix{m});
    m(0, 0) = 0.7;
    CHECK_THROWS_AS(DensityMatrix{m}, DomainError);  // trace
    CMatrix neg(2, 2);
    neg << 1.2, 0, 0, -0.2;
    CHECK_THROWS_AS(DensityMatrix{neg}, DomainError);
    CMatrix nh(2, 2);
    nh << 0.5, 0.1, 0.0, 0.5;
    CHECK_THROWS_AS(DensityMatrix{nh}, DomainError);
    CHECK_THROWS_AS(DensityMatrix{CMatrix::Identity(3, 3) / 3.0}, DomainError);
}

TEST_CASE("quasiprobability coefficients reconstruct the state") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 20; ++t) {
        const DensityMatrix rho(random_density(1, rng));
        const QuasiprobCoeffs c = quasiprob_coeffs(rho);
        CHECK(std::abs(c.vector().sum() - 1.0) < 1e-13);
        CHECK((state_from_quasiprob(c) - rho.matrix()).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((c.vector().transpose() - oracle::bloch_coeffs(rho.matrix())).cwiseAbs().maxCoeff() < 1e-13);
    }
    for (int l = 0; l < 4; ++l) {
        Eigen::Vector4d e = Eigen::Vector4d::Zero();
        e(l) = 1.0;
        CHECK((quasiprob_coeffs(DensityMatrix(ideal_projector(l))).vector() - e).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("GHZ circuits prepare the target states") {
    for (int n : {3, 4}) {
        const double phi = n == 3 ? M_PI / 2 : 3 * M_PI / 4;
        const CVector psi = apply_circuit(ghz_circuit(n), n);
        const double infidelity = 1.0 - std::norm(oracle::ghz(n, phi).dot(psi));
        CHECK(infidelity <= 1e-12);
        CHECK((ghz_target(n) - oracle::ghz(n, phi)).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("Pauli measurement through an ideal POVM gives the operator expectation") {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 10; ++t) {
        const DensityMatrix rho(random_density(3, rng));
        const long idx = std::uniform_int_distribution<long>(1, 63)(rng);
        const std::string w = oracle::word_of(idx, 3);
        const double expect = (rho.matrix() * oracle::pauli_word(w)).trace().real();
        CHECK(std::abs(measure_pauli(rho, PauliString(w), Povm::ideal(3)).expectation - expect) < 1e-12);
    }
}

TEST_CASE("POVM validation rejects elements that do not sum to identity") {
    RMatrix r = RMatrix::Identity(2, 2);
    r(0, 0) = 0.9;
    CHECK_THROWS_AS(DiagonalPovm{r}, DomainError);
    std::vector<CMatrix> els{CMatrix::Identity(2, 2) * 0.6, CMatrix::Identity(2, 2) * 0.6};
    CHECK_THROWS_AS(GeneralPovm{els}, DomainError);
}
