#include "tmem/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <charconv>
#include <numbers>
#include <sstream>

namespace tmem {

namespace {

template <typename E>
[[noreturn]] void rethrow_for_replica(const E& e, int replica) {
    throw E("replica " + std::to_string(replica) + ": " + e.what());
}

// Exact minimizer on a fixed support, from the equality-constrained KKT system.
bool polish_on_support(const RMatrix& ata, const RVector& atq, RVector& p) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) support.push_back(i);
    const Eigen::Index k = static_cast<Eigen::Index>(support.size());
    if (k == 0) return false;
    RMatrix kkt = RMatrix::Zero(k + 1, k + 1);
    RVector rhs(k + 1);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) kkt(a, b) = ata(support[a], support[b]);
        kkt(a, k) = 1.0;
        kkt(k, a) = 1.0;
        rhs(a) = atq(support[a]);
    }
    rhs(k) = 1.0;
    const RVector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return false;
    RVector candidate = RVector::Zero(p.size());
    for (Eigen::Index a = 0; a < k; ++a) {
        if (sol(a) < 0.0) return false;
        candidate(support[a]) = sol(a);
    }
    p = candidate / candidate.sum();
    return true;
}

}  // namespace

double simplex_kkt_residual(const RMatrix& a, const RVector& q, const RVector& p) {
    const RVector g = a.transpose() * (a * p - q);
    return (p - project_simplex(p - g)).cwiseAbs().maxCoeff();
}

SimplexSolveResult solve_simplex_least_squares(const RMatrix& a, const RVector& q, const SimplexSolveOptions& opts) {
    if (a.rows() != q.size()) throw DomainError("correct_distribution: matrix rows do not match the distribution size");
    if (a.cols() == 0) throw DomainError("correct_distribution: empty matrix");
    const RMatrix ata = a.transpose() * a;
    const RVector atq = a.transpose() * q;
    const double lip = Eigen::SelfAdjointEigenSolver<RMatrix>(ata, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();

    auto residual = [&](const RVector& p) { return (p - project_simplex(p - (ata * p - atq))).cwiseAbs().maxCoeff(); };
    auto finish = [&](RVector p, long it) {
        SimplexSolveResult r;
        r.kkt_residual = residual(p);
        r.objective = (a * p - q).squaredNorm();
        r.p = std::move(p);
        r.iterations = it;
        return r;
    };

    const Eigen::Index n = a.cols();
    RVector p = a.rows() == a.cols() ? project_simplex(q) : RVector(RVector::Constant(n, 1.0 / static_cast<double>(n)));
    if (lip <= 0.0) return finish(p, 0);

    double res = residual(p);
    if (res <= opts.kkt_tol) return finish(p, 0);
    RVector y = p;
    double t = 1.0;
    long it = 0;
    for (; it < opts.max_iter; ++it) {
        const RVector next = project_simplex(y - (ata * y - atq) / lip);
        // Restart momentum when it points uphill.
        if ((y - next).dot(next - p) > 0.0) t = 1.0;
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = next + ((t - 1.0) / tn) * (next - p);
        p = next;
        t = tn;
        if (it % 25 == 24) {
            RVector polished = p;
            if (polish_on_support(ata, atq, polished)) {
                const double pr = residual(polished);
                if (pr <= opts.kkt_tol) return finish(std::move(polished), it + 1);
            }
            res = residual(p);
            if (res <= opts.kkt_tol) break;
        }
    }
    res = residual(p);
    if (res > opts.kkt_tol && res > opts.accept_tol)
        throw NumericalError("correct_distribution: solver did not converge after " + std::to_string(it) +
                             " iterations (KKT residual " + std::to_string(res) + ")");
    RVector polished = p;
    if (polish_on_support(ata, atq, polished) && residual(polished) <= res) p = polished;
    return finish(std::move(p), it);
}

ProbabilityDistribution correct_distribution(const ColumnStochasticMatrix& a, const ProbabilityDistribution& q) {
    if (a.dim() != q.size()) throw DomainError("correct_distribution: dimension mismatch");
    RVector p = solve_simplex_least_squares(a.matrix(), q.vector()).p;
    p = p.cwiseMax(0.0);
    p /= p.sum();
    return ProbabilityDistribution(std::move(p));
}

const std::vector<std::pair<PauliString, double>>& mermin_terms(int order) {
    static const std::vector<std::pair<PauliString, double>> m3{
        {PauliString("XXY"), 1}, {PauliString("XYX"), 1}, {PauliString("YXX"), 1}, {PauliString("YYY"), -1}};
    static const std::vector<std::pair<PauliString, double>> m4{
        {PauliString("XXXY"), 1},  {PauliString("XXYX"), 1},  {PauliString("XYXX"), 1},  {PauliString("YXXX"), 1},
        {PauliString("XXYY"), 1},  {PauliString("XYXY"), 1},  {PauliString("XYYX"), 1},  {PauliString("YXXY"), 1},
        {PauliString("YXYX"), 1},  {PauliString("YYXX"), 1},  {PauliString("XXXX"), -1}, {PauliString("XYYY"), -1},
        {PauliString("YXYY"), -1}, {PauliString("YYXY"), -1}, {PauliString("YYYX"), -1}, {PauliString("YYYY"), -1}};
    if (order == 3) return m3;
    if (order == 4) return m4;
    throw DomainError("Mermin order must be 3 or 4");
}

double mermin_value(const std::map<PauliString, double>& expectations, int order) {
    double v = 0.0;
    for (const auto& [word, sign] : mermin_terms(order)) {
        const auto it = expectations.find(word);
        if (it == expectations.end()) throw DomainError("mermin_value: missing expectation for " + word.str());
        v += sign * it->second;
    }
    return v;
}

double mermin_quantum_max(int order) {
    if (order == 3) return 4.0;
    if (order == 4) return 8.0 * std::numbers::sqrt2;
    throw DomainError("Mermin order must be 3 or 4");
}

ReplicaStats replica_stats(const std::vector<double>& values) {
    ReplicaStats s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    if (values.size() < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    return s;
}

std::uint64_t replica_seed(std::uint64_t seed, int replica) {
    return derive_seed(seed, 100, static_cast<std::uint64_t>(replica));
}

ReplicaCalibration calibrate_replica(const NoiseConfig& noise, int replica, bool bypass_gst, const Shots& shots,
                                     const GaugeWeights& weights) {
    const std::uint64_t seed = replica_seed(noise.seed, replica);
    Rng rng(derive_seed(seed, 10));
    ErrorModel model = build_planted_model(noise, rng);
    std::vector<GaugeResult> gst;
    std::vector<LMatrix> Ls;
    for (int q = 0; q < model.n; ++q) {
        const SingleQubitNoise& sq = model.per_qubit[static_cast<std::size_t>(q)];
        if (bypass_gst) {
            Ls.push_back(compute_L(fiducial_states(sq)));
            continue;
        }
        gst.push_back(run_gst(sq, marginal_effect(model, q), shots, derive_seed(seed, 20, static_cast<std::uint64_t>(q)), weights));
        Ls.push_back(estimate_L(gst.back().estimate));
    }
    ColumnStochasticMatrix t = measure_T(model, shots, derive_seed(seed, 30));
    ColumnStochasticMatrix gamma = assemble_gamma(Ls, measure_calibration_table(model, shots, derive_seed(seed, 31)));
    return {replica, seed, std::move(model), std::move(gst), std::move(Ls), std::move(t), std::move(gamma)};
}

MerminReplica evaluate_mermin(const ReplicaCalibration& cal, int order, double eta, const Shots& shots) {
    if (cal.model.n != order) throw DomainError("evaluate_mermin: register size does not match the Mermin order");
    const DensityMatrix rho = depolarized_ghz(order, eta);
    const Povm ideal = Povm::ideal(order);
    MerminReplica out;
    out.replica = cal.replica;
    out.seed = cal.seed;
    std::map<PauliString, double> exact, raw, tc, gc;
    for (const auto& [word, sign] : mermin_terms(order)) {
        MerminValues v;
        v.exact = measure_pauli(rho, word, ideal).expectation;
        Rng rng(derive_seed(cal.seed, 40, static_cast<std::uint64_t>(word.index())));
        const ProbabilityDistribution q =
            estimate_distribution(measure_pauli(rho, word, cal.model.povm).distribution, shots, rng);
        v.raw = parity_expectation(q.vector(), word);
        v.t_corrected = parity_expectation(correct_distribution(cal.T, q).vector(), word);
        v.gamma_corrected = parity_expectation(correct_distribution(cal.gamma, q).vector(), word);
        exact[word] = v.exact;
        raw[word] = v.raw;
        tc[word] = v.t_corrected;
        gc[word] = v.gamma_corrected;
        out.terms.emplace(word, v);
    }
    out.values = {mermin_value(exact, order), mermin_value(raw, order), mermin_value(tc, order),
                  mermin_value(gc, order)};
    return out;
}

std::vector<MerminReport> eta_sweep(const MerminConfig& cfg, const std::vector<double>& etas) {
    if (cfg.order != 3 && cfg.order != 4) throw DomainError("mermin: order must be 3 or 4");
    if (cfg.replicas < 1) throw DomainError("mermin: replicas must be >= 1");
    for (double e : etas)
        if (!(e >= 0.0 && e <= 1.0)) throw DomainError("mermin: eta values must lie in [0, 1]");
    NoiseConfig noise = cfg.noise;
    noise.n = cfg.order;

    std::vector<MerminReport> reports(etas.size());
    for (std::size_t i = 0; i < etas.size(); ++i) {
        reports[i].order = cfg.order;
        reports[i].eta = etas[i];
    }
    for (int r = 0; r < cfg.replicas; ++r) {
        try {
            const ReplicaCalibration cal = calibrate_replica(noise, r, cfg.bypass_gst, cfg.shots, cfg.weights);
            for (std::size_t i = 0; i < etas.size(); ++i)
                reports[i].replicas.push_back(evaluate_mermin(cal, cfg.order, etas[i], cfg.shots));
        } catch (const NumericalError& e) {
            rethrow_for_replica(e, r);
        } catch (const DomainError& e) {
            rethrow_for_replica(e, r);
        }
    }
    for (MerminReport& rep : reports) {
        std::vector<double> ex, raw, tc, gc;
        for (const MerminReplica& r : rep.replicas) {
            ex.push_back(r.values.exact);
            raw.push_back(r.values.raw);
            tc.push_back(r.values.t_corrected);
            gc.push_back(r.values.gamma_corrected);
            for (const auto& [word, v] : r.terms) {
                MerminValues& m = rep.term_means[word];
                m.exact += v.exact;
                m.raw += v.raw;
                m.t_corrected += v.t_corrected;
                m.gamma_corrected += v.gamma_corrected;
            }
        }
        const double n = static_cast<double>(rep.replicas.size());
        for (auto& [word, m] : rep.term_means) {
            m.exact /= n;
            m.raw /= n;
            m.t_corrected /= n;
            m.gamma_corrected /= n;
        }
        rep.exact = replica_stats(ex);
        rep.raw = replica_stats(raw);
        rep.t_corrected = replica_stats(tc);
        rep.gamma_corrected = replica_stats(gc);
    }
    return reports;
}

MerminReport run_mermin_pipeline(const MerminConfig& cfg, double eta) {
    return eta_sweep(cfg, {eta}).front();
}

const Eigen::Matrix4d& pauli_to_state_matrix() {
    static const Eigen::Matrix4d m = [] {
        Eigen::Matrix4d t;
        t << 1, 1, 0, 0,
            -1, -1, 2, 0,
            -1, -1, 0, 2,
            1, -1, 0, 0;
        return t;
    }();
    return m;
}

ChannelSpec ChannelSpec::parse(const std::string& text) {
    ChannelSpec s;
    const auto colon = text.find(':');
    s.name = text.substr(0, colon);
    std::string lower = s.name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "depolarizing" || lower == "depolarising") {
        if (colon == std::string::npos) throw DomainError("channel: depolarizing needs a strength, e.g. depolarizing:0.1");
        try {
            std::size_t used = 0;
            s.p = std::stod(text.substr(colon + 1), &used);
            if (used != text.size() - colon - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw DomainError("channel: cannot parse depolarizing strength in '" + text + "'");
        }
        if (!(s.p >= 0.0 && s.p <= 4.0 / 3.0)) throw DomainError("channel: depolarizing strength out of range");
        s.name = "depolarizing";
        return s;
    }
    if (colon != std::string::npos) throw DomainError("channel: unexpected parameter in '" + text + "'");
    if (lower == "identity" || lower == "id") {
        s.name = "identity";
        return s;
    }
    if (lower == "cnot") {
        s.name = "cnot";
        return s;
    }
    std::string upper = s.name;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    single_qubit_gate(upper);  // validates the name
    s.name = upper;
    return s;
}

std::string ChannelSpec::str() const {
    if (name == "depolarizing") {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, p);
        return name + ':' + std::string(buf, res.ptr);
    }
    return name;
}

Ptm channel_ptm(const ChannelSpec& spec, int n) {
    if (n < 1) throw DomainError("channel_ptm: register size must be positive");
    const long words = 1L << (2 * n);
    if (spec.name == "identity") return Ptm::Identity(words, words);
    if (spec.name == "depolarizing") return depolarizing_ptm(spec.p, n);
    if (spec.name == "cnot") {
        if (n != 2) throw DomainError("channel: cnot needs a two-qubit register");
        CMatrix u = CMatrix::Zero(4, 4);
        u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1.0;
        return ptm_of_unitary(u);
    }
    std::vector<CMatrix> parts(static_cast<std::size_t>(n), CMatrix(single_qubit_gate(spec.name)));
    return ptm_of_unitary(kron_all(parts));
}

Ptm qpt_reconstruct(const ErrorModel& model, const Ptm& channel, const std::vector<LMatrix>& Ls,
                    const ColumnStochasticMatrix& gamma, const QptOptions& opts) {
    const int n = model.n;
    if (n > opts.max_qubits)
        throw DomainError("qpt: register of " + std::to_string(n) + " qubits exceeds the cap of " +
                          std::to_string(opts.max_qubits));
    const long words = 1L << (2 * n);
    if (channel.rows() != words || channel.cols() != words) throw DomainError("qpt: channel dimension mismatch");
    if (static_cast<int>(Ls.size()) != n) throw DomainError("qpt: need one L matrix per qubit");
    if (gamma.dim() != dim_of(n)) throw DomainError("qpt: Gamma dimension mismatch");

    const Eigen::Matrix4d mp = opts.pauli_to_state.value_or(pauli_to_state_matrix());
    std::vector<Eigen::Matrix4d> coeff;
    for (int q = 0; q < n; ++q) coeff.push_back(mp * invert_L(Ls[static_cast<std::size_t>(q)], q));
    std::vector<std::array<DensityMatrix, 4>> fids;
    for (const auto& sq : model.per_qubit) fids.push_back(fiducial_states(sq));

    // m(sigma, lambda) = tr[sigma Phi(rho_lambda)]
    RMatrix m(words, words);
    for (long lam = 0; lam < words; ++lam) {
        CMatrix rho = fids[0][static_cast<std::size_t>((lam >> (2 * (n - 1))) & 3)].matrix();
        for (int q = 1; q < n; ++q)
            rho = kron(rho, fids[static_cast<std::size_t>(q)][static_cast<std::size_t>((lam >> (2 * (n - 1 - q))) & 3)].matrix());
        CMatrix out = apply_ptm(channel, rho);
        out = 0.5 * (out + out.adjoint());
        std::map<long, RVector> corrected;  // keyed by measurement setting
        for (long s = 0; s < words; ++s) {
            if (s == 0) {
                m(0, lam) = out.trace().real();
                continue;
            }
            const PauliString sigma = PauliString::from_index(s, n);
            std::string setting = sigma.str();
            std::replace(setting.begin(), setting.end(), 'I', 'Z');
            const PauliString basis(setting);
            auto it = corrected.find(basis.index());
            if (it == corrected.end()) {
                const CMatrix u = basis_change(basis);
                Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(lam), static_cast<std::uint64_t>(basis.index())));
                const ProbabilityDistribution raw(model.povm.probabilities(u * out * u.adjoint()));
                const ProbabilityDistribution q = estimate_distribution(raw, opts.shots, rng);
                it = corrected.emplace(basis.index(), correct_distribution(gamma, q).vector()).first;
            }
            m(s, lam) = parity_expectation(it->second, sigma);
        }
    }

    RMatrix w(words, words);  // w(sigma', lambda) = prod_i (M L_i^-1)_{sigma'_i, lambda_i}
    for (long sp = 0; sp < words; ++sp)
        for (long lam = 0; lam < words; ++lam) {
            double v = 1.0;
            for (int q = 0; q < n; ++q)
                v *= coeff[static_cast<std::size_t>(q)](static_cast<int>((sp >> (2 * (n - 1 - q))) & 3),
                                                        static_cast<int>((lam >> (2 * (n - 1 - q))) & 3));
            w(sp, lam) = v;
        }
    return m * w.transpose() / static_cast<double>(dim_of(n));
}

}  // namespace tmem
