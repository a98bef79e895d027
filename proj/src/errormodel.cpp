#include "tmem/errormodel.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace tmem {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

SingleQubitNoise SingleQubitNoise::ideal() {
    return planted_single_qubit(0.0, 0.0);
}

ErrorModel::ErrorModel(int n_qubits, std::vector<SingleQubitNoise> noise, Povm measurement)
    : n(n_qubits), per_qubit(std::move(noise)), povm(std::move(measurement)) {
    if (n < 1) throw DomainError("ErrorModel: register size must be positive");
    if (static_cast<int>(per_qubit.size()) != n) throw DomainError("ErrorModel: need one noise record per qubit");
    if (povm.qubits() != n) throw DomainError("ErrorModel: POVM dimension does not match the register");
    for (const auto& sq : per_qubit)
        if (sq.rho0.qubits() != 1 || sq.gx.rows() != 4 || sq.gy.rows() != 4)
            throw DomainError("ErrorModel: per-qubit records must be single-qubit");
}

void NoiseConfig::validate() const {
    if (n < 1 || n > 10) throw DomainError("noise: n must be in [1, 10]");
    if (!(state_depol >= 0.0 && state_depol <= 1.0)) throw DomainError("noise: state_depol must be in [0, 1]");
    if (!(gate_depol >= 0.0 && gate_depol <= 1.0)) throw DomainError("noise: gate_depol must be in [0, 1]");
    if (!(povm_noise_target >= 0.0)) throw DomainError("noise: povm_noise_target must be >= 0");
    if (!(povm_step > 0.0 && povm_step <= 1.0)) throw DomainError("noise: povm_step must be in (0, 1]");
}

Ptm depolarizing_ptm(double p, int n) {
    if (n < 1) throw DomainError("depolarizing_ptm: register size must be positive");
    // completely positive for 0 <= p <= d^2 / (d^2 - 1)
    const double words_d = std::ldexp(1.0, 2 * n);
    if (!(p >= 0.0 && p <= words_d / (words_d - 1.0))) throw DomainError("depolarizing_ptm: strength out of range");
    const long words = 1L << (2 * n);
    Ptm d = Ptm::Identity(words, words) * (1.0 - p);
    d(0, 0) = 1.0;
    return d;
}

SingleQubitNoise planted_single_qubit(double state_depol, double gate_depol) {
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    rho(0, 0) = 1.0 - state_depol / 2.0;
    rho(1, 1) = state_depol / 2.0;
    const Ptm dep = depolarizing_ptm(gate_depol);
    return {DensityMatrix(CMatrix(rho)), dep * ptm_of_unitary(single_qubit_gate("GX")),
            dep * ptm_of_unitary(single_qubit_gate("GY"))};
}

ErrorModel build_planted_model(const NoiseConfig& cfg, Rng& rng) {
    cfg.validate();
    std::vector<SingleQubitNoise> noise(static_cast<std::size_t>(cfg.n),
                                        planted_single_qubit(cfg.state_depol, cfg.gate_depol));
    return ErrorModel(cfg.n, std::move(noise), Povm(random_diagonal_povm(cfg.n, cfg.povm_noise_target, rng, cfg.povm_step)));
}

DiagonalPovm random_diagonal_povm(int n, double target, Rng& rng, double step) {
    if (n < 1) throw DomainError("random_diagonal_povm: n must be positive");
    if (!(target >= 0.0)) throw DomainError("random_diagonal_povm: target must be >= 0");
    if (!(step > 0.0 && step <= 1.0)) throw DomainError("random_diagonal_povm: step must be in (0, 1]");
    const int d = dim_of(n);
    // Each column can move at most sqrt(2) away from its identity column.
    if (target >= std::sqrt(2.0 * d))
        throw DomainError("random_diagonal_povm: target " + std::to_string(target) + " exceeds the reachable noise level");
    const RMatrix eye = RMatrix::Identity(d, d);
    RMatrix r = eye;
    if (target == 0.0) return DiagonalPovm(r);

    std::uniform_int_distribution<int> pick(0, d - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr long kMaxSteps = 50'000'000;
    for (long it = 0; it < kMaxSteps; ++it) {
        const int s = pick(rng);
        const int x1 = pick(rng);
        int x2 = pick(rng);
        while (x2 == x1) x2 = pick(rng);
        const double u = step * (1.0 - unit(rng));
        const double delta = u * std::min(r(x1, s), 1.0 - r(x2, s));
        if (delta <= 0.0) continue;
        auto norm_after = [&](double m) {
            RMatrix trial = r;
            trial(x1, s) -= m;
            trial(x2, s) += m;
            return (trial - eye).norm();
        };
        if (norm_after(delta) <= target) {
            r(x1, s) -= delta;
            r(x2, s) += delta;
            continue;
        }
        double lo = 0.0, hi = delta;
        for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            (norm_after(mid) > target ? hi : lo) = mid;
        }
        r(x1, s) -= lo;
        r(x2, s) += lo;
        // Column sums drift by round-off only.
        for (int c = 0; c < d; ++c) r.col(c) /= r.col(c).sum();
        return DiagonalPovm(r);
    }
    throw NumericalError("random_diagonal_povm: target not reached within the step budget");
}

GeneralPovm random_general_povm(int n, double strength, Rng& rng) {
    if (!(strength >= 0.0 && strength <= 1.0)) throw DomainError("random_general_povm: strength must be in [0, 1]");
    const int d = dim_of(n);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<CMatrix> a(static_cast<std::size_t>(d));
    CMatrix total = CMatrix::Zero(d, d);
    for (int x = 0; x < d; ++x) {
        CMatrix g(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
        CMatrix ax = strength * (g * g.adjoint()) / static_cast<double>(2 * d * d);
        ax(x, x) += 1.0 - strength;
        a[static_cast<std::size_t>(x)] = ax;
        total += ax;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(total);
    const CMatrix inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                             es.eigenvectors().adjoint();
    std::vector<CMatrix> elements;
    elements.reserve(a.size());
    for (const CMatrix& ax : a) {
        CMatrix e = inv_sqrt * ax * inv_sqrt;
        elements.emplace_back(0.5 * (e + e.adjoint()));
    }
    return GeneralPovm(std::move(elements));
}

SingleQubitNoise random_single_qubit_noise(double strength, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto small_rotation = [&]() {
        const double th = strength * gauss(rng);
        Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
        axis.normalize();
        const Eigen::Matrix2cd gen = axis.x() * pauli('X') + axis.y() * pauli('Y') + axis.z() * pauli('Z');
        return Eigen::Matrix2cd(std::cos(th / 2) * Eigen::Matrix2cd::Identity() - Complex(0, 1) * std::sin(th / 2) * gen);
    };
    const Eigen::Matrix2cd v = small_rotation();
    Eigen::Matrix2cd pure = Eigen::Matrix2cd::Zero();
    pure(0, 0) = 1.0;
    const double eps = strength * unit(rng);
    const CMatrix rho = (1.0 - eps) * (v * pure * v.adjoint()) + eps * Eigen::Matrix2cd::Identity() / 2.0;
    const Ptm gx = depolarizing_ptm(strength * 0.1 * unit(rng)) * ptm_of_unitary(small_rotation()) *
                   ptm_of_unitary(single_qubit_gate("GX"));
    const Ptm gy = depolarizing_ptm(strength * 0.1 * unit(rng)) * ptm_of_unitary(small_rotation()) *
                   ptm_of_unitary(single_qubit_gate("GY"));
    return {DensityMatrix(rho), gx, gy};
}

std::vector<GateOp> ghz_circuit(int n) {
    if (n == 3) return {{"H", {0}}, {"S", {0}}, {"CNOT", {0, 1}}, {"CNOT", {1, 2}}};
    if (n == 4) return {{"H", {0}}, {"S", {0}}, {"T", {0}}, {"CNOT", {0, 1}}, {"CNOT", {1, 2}}, {"CNOT", {2, 3}}};
    throw DomainError("ghz_circuit: n must be 3 or 4");
}

CVector ghz_target(int n) {
    if (n != 3 && n != 4) throw DomainError("ghz_target: n must be 3 or 4");
    const double phase = n == 3 ? std::numbers::pi / 2 : 3 * std::numbers::pi / 4;
    CVector psi = CVector::Zero(dim_of(n));
    psi(0) = 1.0 / std::numbers::sqrt2;
    psi(dim_of(n) - 1) = std::polar(1.0 / std::numbers::sqrt2, phase);
    return psi;
}

DensityMatrix depolarized_ghz(int n, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("depolarized_ghz: eta must be in [0, 1]");
    const CVector psi = apply_circuit(ghz_circuit(n), n);
    const int d = dim_of(n);
    CMatrix rho = (1.0 - eta) * (psi * psi.adjoint()) + eta * CMatrix::Identity(d, d) / static_cast<double>(d);
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix(std::move(rho));
}

ColumnStochasticMatrix true_gamma(const ErrorModel& model) {
    const int d = model.povm.dim();
    RMatrix g(d, d);
    for (int xp = 0; xp < d; ++xp)
        for (int x = 0; x < d; ++x) g(x, xp) = model.povm.diagonal_element(x, xp);
    return ColumnStochasticMatrix(std::move(g));
}

DensityMatrix apply_gate(const Ptm& g, const DensityMatrix& rho) {
    CMatrix out = apply_ptm(g, rho.matrix());
    out = 0.5 * (out + out.adjoint());
    return DensityMatrix(std::move(out));
}

DensityMatrix prepared_classical_state(const ErrorModel& model, const std::vector<int>& bits) {
    if (static_cast<int>(bits.size()) != model.n)
        throw DomainError("prepared_classical_state: bitstring length does not match the register");
    std::vector<DensityMatrix> parts;
    parts.reserve(bits.size());
    for (int q = 0; q < model.n; ++q) {
        const SingleQubitNoise& sq = model.per_qubit[static_cast<std::size_t>(q)];
        parts.push_back(bits[static_cast<std::size_t>(q)] ? apply_gate(sq.gx * sq.gx, sq.rho0) : sq.rho0);
    }
    return tensor_states(parts);
}

DensityMatrix prepared_classical_state(const ErrorModel& model, long x) {
    if (x < 0 || x >= dim_of(model.n)) throw DomainError("prepared_classical_state: word out of range");
    std::vector<int> bits(static_cast<std::size_t>(model.n));
    for (int q = 0; q < model.n; ++q) bits[static_cast<std::size_t>(q)] = bit_of(x, q, model.n);
    return prepared_classical_state(model, bits);
}

Eigen::Matrix2cd reduce_to_qubit(const CMatrix& op, int qubit, int n) {
    const long d = dim_of(n);
    if (op.rows() != d || op.cols() != d) throw DomainError("reduce_to_qubit: dimension mismatch");
    const long mask = 1L << (n - 1 - qubit);
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (long i = 0; i < d; ++i) {
        const long rest = i & ~mask;
        const int a = (i & mask) ? 1 : 0;
        for (int b = 0; b < 2; ++b) out(a, b) += op(i, rest | (b ? mask : 0));
    }
    return out;
}

Eigen::Matrix2cd marginal_effect(const ErrorModel& model, int qubit) {
    if (qubit < 0 || qubit >= model.n) throw DomainError("marginal_effect: qubit out of range");
    std::vector<CMatrix> env;
    for (int q = 0; q < model.n; ++q)
        env.emplace_back(q == qubit ? CMatrix(CMatrix::Identity(2, 2)) : model.per_qubit[static_cast<std::size_t>(q)].rho0.matrix());
    const Eigen::Matrix2cd e = reduce_to_qubit(model.povm.marginal_zero_effect(qubit) * kron_all(env), qubit, model.n);
    return 0.5 * (e + e.adjoint());
}

}  // namespace tmem
