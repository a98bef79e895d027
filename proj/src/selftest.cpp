#include "tmem/selftest.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "tmem/io.hpp"
#include "tmem/mitigation.hpp"

namespace tmem {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

CMatrix random_state(int n, Rng& rng) {
    std::normal_distribution<double> g;
    const int d = dim_of(n);
    CMatrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
    CMatrix rho = a * a.adjoint();
    return rho / rho.trace();
}

RMatrix random_stochastic(int d, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RMatrix m(d, d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) m(i, j) = u(rng) + (i == j ? 2.0 : 0.0);
        m.col(j) /= m.col(j).sum();
    }
    return m;
}

using Check = std::function<std::string()>;  // empty string = pass

}  // namespace

std::vector<SelftestCheck> run_selftest(std::uint64_t seed, bool inject_fault) {
    std::vector<std::pair<std::string, Check>> checks;

    checks.emplace_back("qcore.pauli_vector_roundtrip", [&]() -> std::string {
        Rng rng(derive_seed(seed, 900, 1));
        const CMatrix rho = random_state(2, rng);
        const double err = (from_pauli_vector(pauli_vector(rho)) - rho).cwiseAbs().maxCoeff();
        return err <= 1e-12 ? "" : "roundtrip error " + fmt(err);
    });

    checks.emplace_back("qcore.unitary_ptm_orthogonal", [&]() -> std::string {
        const CMatrix u = kron(single_qubit_gate("H"), single_qubit_gate("T"));
        const Ptm r = ptm_of_unitary(u);
        const double err = (r.transpose() * r - RMatrix::Identity(16, 16)).cwiseAbs().maxCoeff();
        return err <= 1e-12 && std::abs(r(0, 0) - 1.0) <= 1e-12 ? "" : "R^T R deviates by " + fmt(err);
    });

    checks.emplace_back("qcore.ghz_circuit_fidelity", [&]() -> std::string {
        for (int n : {3, 4}) {
            const double f = std::norm(ghz_target(n).dot(apply_circuit(ghz_circuit(n), n)));
            if (1.0 - f > 1e-12) return "n=" + std::to_string(n) + " infidelity " + fmt(1.0 - f);
        }
        return std::string();
    });

    checks.emplace_back("mitigation.mermin_ideal_values", [&]() -> std::string {
        for (int n : {3, 4}) {
            const DensityMatrix rho = depolarized_ghz(n, 0.0);
            std::map<PauliString, double> ev;
            for (const auto& [w, c] : mermin_terms(n)) ev[w] = measure_pauli(rho, w, Povm::ideal(n)).expectation;
            const double err = std::abs(mermin_value(ev, n) - mermin_quantum_max(n));
            if (err > 1e-10) return "M" + std::to_string(n) + " off by " + fmt(err);
        }
        return std::string();
    });

    checks.emplace_back("stochastic.simplex_projection_optimality", [&]() -> std::string {
        Rng rng(derive_seed(seed, 900, 2));
        std::normal_distribution<double> g;
        for (int t = 0; t < 50; ++t) {
            RVector v(8);
            for (auto& x : v) x = g(rng);
            const RVector p = project_simplex(v);
            if (p.minCoeff() < 0 || std::abs(p.sum() - 1.0) > 1e-12) return std::string("result leaves the simplex");
            // optimality: v - p is constant on the support and no larger off it
            double tau = 0;
            for (int i = 0; i < 8; ++i)
                if (p(i) > 0) tau = v(i) - p(i);
            for (int i = 0; i < 8; ++i) {
                const double r = v(i) - p(i);
                if ((p(i) > 0 && std::abs(r - tau) > 1e-12) || (p(i) == 0 && r > tau + 1e-12))
                    return "optimality violated at trial " + std::to_string(t);
            }
        }
        return std::string();
    });

    checks.emplace_back("mitigation.solver_kkt", [&]() -> std::string {
        Rng rng(derive_seed(seed, 900, 3));
        const RMatrix a = random_stochastic(8, rng);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        RVector p(8);
        for (auto& x : p) x = u(rng);
        p /= p.sum();
        const auto res = solve_simplex_least_squares(a, a * p);
        const double err = (res.p - p).cwiseAbs().maxCoeff();
        if (err > 1e-8) return "consistent instance recovered with error " + fmt(err);
        RVector q(8);
        for (auto& x : q) x = u(rng) - 0.3;
        const auto res2 = solve_simplex_least_squares(a, q);
        return res2.kkt_residual <= 1e-8 ? "" : "KKT residual " + fmt(res2.kkt_residual);
    });

    checks.emplace_back("calibration.L_rows_and_inverse", [&]() -> std::string {
        const LMatrix L = compute_L(fiducial_states(planted_single_qubit(2e-2, 2e-4)));
        const double rows = (L.matrix().rowwise().sum().array() - 1.0).abs().maxCoeff();
        const double inv = (L.matrix() * invert_L(L) - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
        return rows <= 1e-12 && inv <= 1e-12 ? "" : "row-sum error " + fmt(rows) + ", inverse error " + fmt(inv);
    });

    checks.emplace_back("calibration.gamma_identity", [&]() -> std::string {
        Rng rng(derive_seed(seed, 900, 4));
        std::vector<SingleQubitNoise> noise;
        for (int q = 0; q < 2; ++q) noise.push_back(random_single_qubit_noise(0.05, rng));
        const ErrorModel model(2, noise, random_general_povm(2, 0.2, rng));
        std::vector<LMatrix> Ls;
        for (const auto& sq : noise) Ls.push_back(compute_L(fiducial_states(sq)));
        const RMatrix g = assemble_gamma_raw(Ls, measure_calibration_table(model, Shots::exact(), 0));
        const double err = (g - true_gamma(model).matrix()).cwiseAbs().maxCoeff();
        return err <= 1e-9 ? "" : "assembled Gamma differs by " + fmt(err);
    });

    checks.emplace_back("gst.gauge_invariant_recovery", [&]() -> std::string {
        NoiseConfig cfg;
        cfg.n = 2;
        cfg.seed = seed;
        Rng rng(derive_seed(seed, 900, 5));
        const ErrorModel model = build_planted_model(cfg, rng);
        const auto res = run_gst(model.per_qubit[0], marginal_effect(model, 0), Shots::exact(), 0);
        const Eigen::Vector4d expect(1.0, 0.9998, 0.9998, 0.9998);
        const double ev = std::max((eigenvalue_magnitudes(res.estimate.gx) - expect).cwiseAbs().maxCoeff(),
                                   (eigenvalue_magnitudes(res.estimate.gy) - expect).cwiseAbs().maxCoeff());
        if (ev > 1e-6) return "gate eigenvalue magnitudes off by " + fmt(ev);
        return res.objective <= res.initial_objective ? "" : std::string("gauge fit increased the objective");
    });

    checks.emplace_back("mitigation.bypass_exactness", [&]() -> std::string {
        NoiseConfig cfg;
        cfg.n = 3;
        cfg.seed = seed;
        const auto cal = calibrate_replica(cfg, 0, true, Shots::exact());
        const auto r = evaluate_mermin(cal, 3, 0.3, Shots::exact());
        const double err = std::abs(r.values.gamma_corrected - r.values.exact);
        return err <= 1e-8 ? "" : "Gamma-corrected M3 off by " + fmt(err);
    });

    checks.emplace_back("qpt.depolarizing_reconstruction", [&]() -> std::string {
        NoiseConfig cfg;
        cfg.n = 1;
        cfg.seed = seed;
        cfg.povm_noise_target = 0.02;
        const auto cal = calibrate_replica(cfg, 0, true, Shots::exact());
        QptOptions opts;
        if (inject_fault) {
            Eigen::Matrix4d m = pauli_to_state_matrix();
            m(3, 2) += 0.25;
            opts.pauli_to_state = m;
        }
        const Ptm truth = channel_ptm(ChannelSpec::parse("depolarizing:0.1"), 1);
        const Ptm est = qpt_reconstruct(cal.model, truth, cal.Ls, cal.gamma, opts);
        const double err = (est - truth).cwiseAbs().maxCoeff();
        return err <= 1e-8 ? "" : "reconstructed PTM off by " + fmt(err);
    });

    checks.emplace_back("io.config_roundtrip", [&]() -> std::string {
        RunConfig c;
        c.seed = seed;
        const std::string text = serialize_config(c);
        if (serialize_config(parse_config(text)) != text) return std::string("canonical form not stable");
        try {
            parse_config("[global]\nbogus = 1\n");
        } catch (const ConfigError& e) {
            return std::string(e.what()).find("global.bogus") != std::string::npos
                       ? std::string()
                       : std::string("unknown-key error does not name the key");
        }
        return std::string("unknown key accepted");
    });

    checks.emplace_back("calibration.seeded_determinism", [&]() -> std::string {
        NoiseConfig cfg;
        cfg.n = 2;
        cfg.seed = seed;
        const auto a = calibrate_replica(cfg, 1, false, Shots::of(2000));
        const auto b = calibrate_replica(cfg, 1, false, Shots::of(2000));
        return a.gamma.matrix() == b.gamma.matrix() && a.T.matrix() == b.T.matrix()
                   ? ""
                   : std::string("repeated calibration differs");
    });

    std::vector<SelftestCheck> out;
    for (const auto& [name, fn] : checks) {
        SelftestCheck c{name, false, ""};
        try {
            c.detail = fn();
            c.passed = c.detail.empty();
        } catch (const std::exception& e) {
            c.detail = std::string("threw: ") + e.what();
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace tmem
