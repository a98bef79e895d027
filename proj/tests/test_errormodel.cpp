#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tmem/errormodel.hpp"

using namespace tmem;

TEST_CASE("seed derivation is deterministic and separates streams") {
    CHECK(derive_seed(2021, 1, 2) == derive_seed(2021, 1, 2));
    CHECK(derive_seed(2021, 1, 2) != derive_seed(2021, 2, 1));
    CHECK(derive_seed(2021, 1, 2) != derive_seed(2022, 1, 2));
}

TEST_CASE("depolarizing PTM is diag(1, 1-p, 1-p, 1-p)") {
    const Ptm d = depolarizing_ptm(0.1);
    Eigen::Vector4d diag(1, 0.9, 0.9, 0.9);
    CHECK((d - RMatrix(diag.asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(depolarizing_ptm(-0.1), DomainError);
}

TEST_CASE("planted single-qubit noise matches explicit channel arithmetic") {
    const SingleQubitNoise sq = planted_single_qubit(2e-2, 2e-4);
    CHECK(std::abs(sq.rho0.matrix()(0, 0).real() - 0.99) < 1e-15);
    CHECK(std::abs(sq.rho0.matrix()(1, 1).real() - 0.01) < 1e-15);
    const oracle::CM rho = sq.rho0.matrix();
    const oracle::CM want = oracle::noisy_rotations(rho, 'X', 1, 2e-4);
    CHECK((apply_gate(sq.gx, sq.rho0).matrix() - want).cwiseAbs().maxCoeff() < 1e-14);
    const oracle::CM want_y = oracle::noisy_rotations(rho, 'Y', 1, 2e-4);
    CHECK((apply_gate(sq.gy, sq.rho0).matrix() - want_y).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("random diagonal POVM hits the target norm and is column stochastic") {
    for (double target : {0.02, 0.1, 0.3})
        for (std::uint64_t s = 0; s < 5; ++s) {
            Rng rng(s);
            const DiagonalPovm p = random_diagonal_povm(3, target, rng);
            const RMatrix& r = p.response();
            CHECK(std::abs((r - RMatrix::Identity(8, 8)).norm() - target) <= 5e-3);
            CHECK(r.minCoeff() >= 0.0);
            CHECK((r.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        }
    Rng rng(0);
    CHECK(random_diagonal_povm(2, 0.0, rng).response() == RMatrix::Identity(4, 4));
    CHECK_THROWS_AS(random_diagonal_povm(1, 5.0, rng), DomainError);
}

TEST_CASE("random diagonal POVM is reproducible from the seed") {
    Rng a(7), b(7);
    CHECK(random_diagonal_povm(3, 0.1, a).response() == random_diagonal_povm(3, 0.1, b).response());
}

TEST_CASE("random general POVM elements are PSD and sum to identity") {
    Rng rng(31);
    for (int n = 1; n <= 3; ++n) {
        const GeneralPovm p = random_general_povm(n, 0.3, rng);
        CMatrix sum = CMatrix::Zero(dim_of(n), dim_of(n));
        for (const auto& e : p.elements()) {
            sum += e;
            CHECK(Eigen::SelfAdjointEigenSolver<CMatrix>(e).eigenvalues().minCoeff() > -1e-12);
        }
        CHECK((sum - CMatrix::Identity(dim_of(n), dim_of(n))).cwiseAbs().maxCoeff() < 1e-10);
        bool offdiag = false;
        for (const auto& e : p.elements())
            for (int i = 0; i < e.rows(); ++i)
                for (int j = 0; j < e.cols(); ++j) offdiag = offdiag || (i != j && std::abs(e(i, j)) > 1e-6);
        CHECK(offdiag);
    }
}

TEST_CASE("true Gamma reads the POVM diagonal") {
    Rng rng(32);
    const GeneralPovm p = random_general_povm(2, 0.3, rng);
    const ErrorModel model(2, {SingleQubitNoise::ideal(), SingleQubitNoise::ideal()}, p);
    CHECK((true_gamma(model).matrix() - oracle::gamma_from_elements(p.elements())).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("depolarized GHZ is the convex mixture with the maximally mixed state") {
    const DensityMatrix rho = depolarized_ghz(3, 0.25);
    const Eigen::VectorXcd psi = oracle::ghz(3, M_PI / 2);
    const oracle::CM want = 0.75 * psi * psi.adjoint() + 0.25 * oracle::CM::Identity(8, 8) / 8.0;
    CHECK((rho.matrix() - want).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(depolarized_ghz(3, 1.5), DomainError);
}

TEST_CASE("planted model config validation") {
    NoiseConfig c;
    c.state_depol = -0.1;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = NoiseConfig{};
    c.n = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("prepared classical states are tensor products of rho0 and Gx^2 rho0") {
    Rng rng(33);
    NoiseConfig cfg;
    cfg.n = 2;
    const ErrorModel m = build_planted_model(cfg, rng);
    const oracle::CM r0 = m.per_qubit[0].rho0.matrix();
    const oracle::CM r1 = oracle::noisy_rotations(m.per_qubit[1].rho0.matrix(), 'X', 2, 2e-4);
    CHECK((prepared_classical_state(m, 1).matrix() - oracle::kron(r0, r1)).cwiseAbs().maxCoeff() < 1e-14);
}
