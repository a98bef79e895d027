#include "tmem/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tmem {

LMatrix::LMatrix(const Eigen::Matrix4d& m) : m_(m) {
    if (!m_.allFinite()) throw DomainError("LMatrix: non-finite entry");
    for (int r = 0; r < 4; ++r)
        if (std::abs(m_.row(r).sum() - 1.0) > kRowTol)
            throw DomainError("LMatrix: row " + std::to_string(r) + " sums to " + std::to_string(m_.row(r).sum()));
}

double LMatrix::condition_number() const {
    const Eigen::Vector4d sv = Eigen::JacobiSVD<Eigen::Matrix4d>(m_).singularValues();
    return sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
}

Shots Shots::of(long n) {
    if (n < 1) throw DomainError("shots must be >= 1");
    return {n};
}

std::string Shots::str() const {
    return count ? std::to_string(*count) : "exact";
}

CalibrationTable::CalibrationTable(int n, std::vector<ProbabilityDistribution> rows) : n_(n), rows_(std::move(rows)) {
    if (n < 1) throw DomainError("CalibrationTable: register size must be positive");
    if (static_cast<long>(rows_.size()) != (1L << (2 * n)))
        throw DomainError("CalibrationTable: expected " + std::to_string(1L << (2 * n)) + " entries, got " +
                          std::to_string(rows_.size()));
    for (const auto& r : rows_)
        if (r.size() != dim_of(n)) throw DomainError("CalibrationTable: distribution size mismatch");
}

RMatrix CalibrationTable::as_matrix() const {
    RMatrix m(words(), dim_of(n_));
    for (long w = 0; w < words(); ++w) m.row(w) = at(w).vector().transpose();
    return m;
}

std::string lambda_word_label(long word, int n) {
    std::string out;
    for (int q = 0; q < n; ++q) {
        if (q) out += '_';
        out += fiducial_label(static_cast<int>((word >> (2 * (n - 1 - q))) & 3));
    }
    return out;
}

long classical_lambda_word(long x, int n) {
    long w = 0;
    for (int q = 0; q < n; ++q) w = 4 * w + bit_of(x, q, n);
    return w;
}

std::array<DensityMatrix, 4> fiducial_states(const SingleQubitNoise& sq) {
    const Ptm gx2 = sq.gx * sq.gx;
    return {sq.rho0, apply_gate(gx2, sq.rho0), apply_gate(sq.gy, sq.rho0), apply_gate(gx2 * sq.gx, sq.rho0)};
}

LMatrix compute_L(const std::array<DensityMatrix, 4>& fiducials) {
    Eigen::Matrix4d m;
    for (int l = 0; l < 4; ++l) m.row(l) = quasiprob_coeffs(fiducials[static_cast<std::size_t>(l)]).vector().transpose();
    return LMatrix(m);
}

Eigen::Matrix4d invert_L(const LMatrix& L, int qubit, double max_condition) {
    const double cond = L.condition_number();
    if (!(cond < max_condition)) {
        std::string who = qubit >= 0 ? " for qubit " + std::to_string(qubit) : "";
        throw NumericalError("L matrix" + who + " is singular or ill-conditioned (condition number " +
                             std::to_string(cond) + ")");
    }
    return L.matrix().inverse();
}

CountVector sample_distribution(const ProbabilityDistribution& p, long shots, Rng& rng) {
    if (shots < 1) throw DomainError("sample_distribution: shots must be >= 1");
    CountVector out;
    out.shots = shots;
    out.counts.assign(static_cast<std::size_t>(p.size()), 0);
    long left = shots;
    double mass_left = 1.0;
    for (int i = 0; i < p.size() && left > 0; ++i) {
        if (i == p.size() - 1) {
            out.counts[static_cast<std::size_t>(i)] = left;
            break;
        }
        const double q = mass_left > 0.0 ? std::clamp(p[i] / mass_left, 0.0, 1.0) : 0.0;
        std::binomial_distribution<long> draw(left, q);
        const long k = draw(rng);
        out.counts[static_cast<std::size_t>(i)] = k;
        left -= k;
        mass_left -= p[i];
    }
    return out;
}

ProbabilityDistribution estimate_distribution(const ProbabilityDistribution& p, const Shots& shots, Rng& rng) {
    if (shots.is_exact()) return p;
    const CountVector c = sample_distribution(p, *shots.count, rng);
    RVector f(p.size());
    for (int i = 0; i < p.size(); ++i)
        f(i) = static_cast<double>(c.counts[static_cast<std::size_t>(i)]) / static_cast<double>(c.shots);
    return ProbabilityDistribution(f);
}

ColumnStochasticMatrix measure_T(const ErrorModel& model, const Shots& shots, std::uint64_t seed) {
    const int d = dim_of(model.n);
    RMatrix t(d, d);
    for (int xp = 0; xp < d; ++xp) {
        Rng rng(derive_seed(seed, 1, static_cast<std::uint64_t>(xp)));
        const ProbabilityDistribution p(model.povm.probabilities(prepared_classical_state(model, xp).matrix()));
        t.col(xp) = estimate_distribution(p, shots, rng).vector();
    }
    return ColumnStochasticMatrix(std::move(t));
}

CalibrationTable measure_calibration_table(const ErrorModel& model, const Shots& shots, std::uint64_t seed) {
    const int n = model.n;
    std::vector<std::array<DensityMatrix, 4>> fids;
    for (const auto& sq : model.per_qubit) fids.push_back(fiducial_states(sq));
    const long words = 1L << (2 * n);
    std::vector<ProbabilityDistribution> rows;
    rows.reserve(static_cast<std::size_t>(words));
    for (long w = 0; w < words; ++w) {
        CMatrix rho = fids[0][static_cast<std::size_t>((w >> (2 * (n - 1))) & 3)].matrix();
        for (int q = 1; q < n; ++q)
            rho = kron(rho, fids[static_cast<std::size_t>(q)][static_cast<std::size_t>((w >> (2 * (n - 1 - q))) & 3)].matrix());
        Rng rng(derive_seed(seed, 2, static_cast<std::uint64_t>(w)));
        rows.push_back(estimate_distribution(ProbabilityDistribution(model.povm.probabilities(rho)), shots, rng));
    }
    return CalibrationTable(n, std::move(rows));
}

RMatrix classical_inverse_weights(const std::vector<Eigen::Matrix4d>& l_inverses) {
    const int n = static_cast<int>(l_inverses.size());
    if (n < 1) throw DomainError("classical_inverse_weights: no L matrices");
    const long d = dim_of(n), words = 1L << (2 * n);
    RMatrix w(d, words);
    for (long xp = 0; xp < d; ++xp) {
        for (long lam = 0; lam < words; ++lam) {
            double v = 1.0;
            for (int q = 0; q < n; ++q)
                v *= l_inverses[static_cast<std::size_t>(q)](bit_of(xp, q, n), static_cast<int>((lam >> (2 * (n - 1 - q))) & 3));
            w(xp, lam) = v;
        }
    }
    return w;
}

RMatrix assemble_gamma_raw(const std::vector<LMatrix>& Ls, const CalibrationTable& table) {
    if (static_cast<int>(Ls.size()) != table.qubits())
        throw DomainError("assemble_gamma: need one L matrix per qubit");
    std::vector<Eigen::Matrix4d> inv;
    for (std::size_t q = 0; q < Ls.size(); ++q) inv.push_back(invert_L(Ls[q], static_cast<int>(q)));
    return table.as_matrix().transpose() * classical_inverse_weights(inv).transpose();
}

ColumnStochasticMatrix assemble_gamma(const std::vector<LMatrix>& Ls, const CalibrationTable& table) {
    return project_column_stochastic(assemble_gamma_raw(Ls, table));
}

ColumnStochasticMatrix t_from_table(const CalibrationTable& table) {
    const int n = table.qubits(), d = dim_of(n);
    RMatrix t(d, d);
    for (int xp = 0; xp < d; ++xp) t.col(xp) = table.at(classical_lambda_word(xp, n)).vector();
    return ColumnStochasticMatrix(std::move(t));
}

}  // namespace tmem
