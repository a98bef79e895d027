#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tmem/calibration.hpp"

using namespace tmem;

TEST_CASE("L of the planted fiducials matches the Bloch-vector oracle") {
    for (auto [eps, p] : {std::pair{2e-2, 2e-4}, std::pair{0.1, 0.01}, std::pair{0.0, 0.0}}) {
        const LMatrix L = compute_L(fiducial_states(planted_single_qubit(eps, p)));
        CHECK((L.matrix() - oracle::planted_L(eps, p)).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((L.matrix().rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-13);
    }
    CHECK((compute_L(fiducial_states(SingleQubitNoise::ideal())).matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("L matrix rows must sum to one") {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(0, 1) = 0.1;
    CHECK_THROWS_AS(LMatrix{m}, DomainError);
}

TEST_CASE("singular L raises a numerical error naming the qubit") {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.row(1) = m.row(0);
    try {
        invert_L(LMatrix(m), 2);
        FAIL("expected a throw");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("qubit 2") != std::string::npos);
    }
}

TEST_CASE("lambda-word labels and classical words") {
    CHECK(lambda_word_label(0, 2) == "0_0");
    CHECK(lambda_word_label(2 * 16 + 3 * 4 + 1 * 1, 3) == "+_+i_1");
    CHECK(classical_lambda_word(0b101, 3) == 1 * 16 + 0 + 1);
}

TEST_CASE("multinomial sampling keeps the total and converges to p") {
    Rng rng(41);
    const ProbabilityDistribution p(RVector::LinSpaced(4, 1, 4) / 10.0);
    const CountVector c = sample_distribution(p, 100000, rng);
    long total = 0;
    for (long k : c.counts) total += k;
    CHECK(total == 100000);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(static_cast<double>(c.counts[static_cast<std::size_t>(i)]) / 1e5 - p[i]) < 5 * std::sqrt(0.25 / 1e5));
    CHECK(estimate_distribution(p, Shots::exact(), rng).vector() == p.vector());
    CHECK_THROWS_AS(Shots::of(0), DomainError);
}

TEST_CASE("assembled Gamma equals the true response for random models with non-diagonal POVMs") {
    Rng rng(42);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + t % 3;
        std::vector<SingleQubitNoise> noise;
        for (int q = 0; q < n; ++q) noise.push_back(random_single_qubit_noise(0.08, rng));
        const GeneralPovm povm = random_general_povm(n, 0.4, rng);
        const ErrorModel model(n, noise, povm);
        std::vector<LMatrix> Ls;
        for (const auto& sq : noise) Ls.push_back(compute_L(fiducial_states(sq)));
        const CalibrationTable table = measure_calibration_table(model, Shots::exact(), 0);
        const double err =
            (assemble_gamma(Ls, table).matrix() - oracle::gamma_from_elements(povm.elements())).cwiseAbs().maxCoeff();
        worst = std::max(worst, err);
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("T from the table equals the directly measured T") {
    Rng rng(43);
    NoiseConfig cfg;
    cfg.n = 3;
    const ErrorModel m = build_planted_model(cfg, rng);
    const CalibrationTable table = measure_calibration_table(m, Shots::exact(), 0);
    CHECK(table.words() == 64);
    CHECK((t_from_table(table).matrix() - measure_T(m, Shots::exact(), 0).matrix()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("calibration table rows are distributions of the prepared lambda-word states") {
    Rng rng(44);
    NoiseConfig cfg;
    cfg.n = 2;
    const ErrorModel m = build_planted_model(cfg, rng);
    const CalibrationTable table = measure_calibration_table(m, Shots::exact(), 0);
    const auto f0 = fiducial_states(m.per_qubit[0]);
    const auto f1 = fiducial_states(m.per_qubit[1]);
    for (long w = 0; w < 16; ++w) {
        const oracle::CM rho = oracle::kron(f0[static_cast<std::size_t>(w / 4)].matrix(), f1[static_cast<std::size_t>(w % 4)].matrix());
        CHECK((table.at(w).vector() - m.povm.probabilities(rho)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("finite-shot Gamma stays column stochastic and is seed-reproducible") {
    Rng rng(45);
    NoiseConfig cfg;
    cfg.n = 2;
    const ErrorModel m = build_planted_model(cfg, rng);
    std::vector<LMatrix> Ls;
    for (const auto& sq : m.per_qubit) Ls.push_back(compute_L(fiducial_states(sq)));
    const auto g1 = assemble_gamma(Ls, measure_calibration_table(m, Shots::of(500), 9));
    const auto g2 = assemble_gamma(Ls, measure_calibration_table(m, Shots::of(500), 9));
    CHECK(g1.matrix() == g2.matrix());
    CHECK(g1.matrix().minCoeff() >= 0.0);
    CHECK((g1.matrix().colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
}
