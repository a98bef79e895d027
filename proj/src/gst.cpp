#include "tmem/gst.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace tmem {

namespace {

struct Fiducials {
    std::array<Eigen::Matrix4d, 4> prep;
    std::array<Eigen::Matrix4d, 4> meas;
};

Fiducials fiducials_of(const Eigen::Matrix4d& gx, const Eigen::Matrix4d& gy) {
    const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
    return {{id, gx * gx, gy, gx * gx * gx}, {id, gx, gy, gx * gx}};
}

LgstData forward(const Eigen::Vector4d& rho, const Eigen::Matrix4d& gx, const Eigen::Matrix4d& gy,
                 const Eigen::Vector4d& e0) {
    const Fiducials f = fiducials_of(gx, gy);
    LgstData d;
    for (int j = 0; j < 4; ++j) {
        const Eigen::RowVector4d b = e0.transpose() * f.meas[static_cast<std::size_t>(j)];
        d.rho_vec(j) = b * rho;
        for (int k = 0; k < 4; ++k) {
            const Eigen::Vector4d c = f.prep[static_cast<std::size_t>(k)] * rho;
            d.gram(j, k) = b * c;
            d.p_gx(j, k) = b * gx * c;
            d.p_gy(j, k) = b * gy * c;
        }
    }
    return d;
}

Eigen::Matrix4d target_prep_columns() {
    const GateSetEstimate t = GateSetEstimate::ideal();
    const Fiducials f = fiducials_of(t.gx, t.gy);
    Eigen::Matrix4d c;
    for (int k = 0; k < 4; ++k) c.col(k) = f.prep[static_cast<std::size_t>(k)] * t.rho;
    return c;
}

Eigen::Matrix4d gauge_from_params(const Eigen::Matrix<double, 12, 1>& k) {
    Eigen::Matrix4d gen = Eigen::Matrix4d::Zero();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) gen(r + 1, c) = k(4 * r + c);
    return gen.exp();
}

}  // namespace

GateSetEstimate GateSetEstimate::ideal() {
    Eigen::Matrix2cd zero = Eigen::Matrix2cd::Zero();
    zero(0, 0) = 1.0;
    GateSetEstimate g;
    g.rho = pauli_vector(zero);
    g.gx = ptm_of_unitary(single_qubit_gate("GX"));
    g.gy = ptm_of_unitary(single_qubit_gate("GY"));
    g.e0 = effect_vector(zero);
    return g;
}

GateSetEstimate GateSetEstimate::from_model(const SingleQubitNoise& sq, const Eigen::Matrix2cd& e0) {
    GateSetEstimate g;
    g.rho = pauli_vector(sq.rho0.matrix());
    g.gx = sq.gx;
    g.gy = sq.gy;
    g.e0 = effect_vector(e0);
    return g;
}

DensityMatrix GateSetEstimate::rho0() const {
    CMatrix m = from_pauli_vector(rho);
    return DensityMatrix(CMatrix(0.5 * (m + m.adjoint())));
}

Eigen::Matrix2cd GateSetEstimate::e0_matrix() const {
    return from_effect_vector(e0);
}

SingleQubitNoise GateSetEstimate::as_noise() const {
    return {rho0(), gx, gy};
}

LgstData simulate_gst_data(const SingleQubitNoise& sq, const Eigen::Matrix2cd& e0, const Shots& shots,
                           std::uint64_t seed) {
    LgstData d = forward(pauli_vector(sq.rho0.matrix()), sq.gx, sq.gy, effect_vector(e0));
    if (shots.is_exact()) return d;
    Rng rng(derive_seed(seed, 3));
    auto sample = [&](double p) {
        std::binomial_distribution<long> draw(*shots.count, std::clamp(p, 0.0, 1.0));
        return static_cast<double>(draw(rng)) / static_cast<double>(*shots.count);
    };
    for (int j = 0; j < 4; ++j) {
        d.rho_vec(j) = sample(d.rho_vec(j));
        for (int k = 0; k < 4; ++k) {
            d.gram(j, k) = sample(d.gram(j, k));
            d.p_gx(j, k) = sample(d.p_gx(j, k));
            d.p_gy(j, k) = sample(d.p_gy(j, k));
        }
    }
    return d;
}

LgstData predict_gst_data(const GateSetEstimate& est) {
    return forward(est.rho, est.gx, est.gy, est.e0);
}

GateSetEstimate lgst_estimate(const LgstData& data, double max_condition) {
    const Eigen::Vector4d sv = Eigen::JacobiSVD<Eigen::Matrix4d>(data.gram).singularValues();
    const double cond = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
    if (!(cond < max_condition))
        throw NumericalError("LGST: Gram matrix is singular (condition number " + std::to_string(cond) +
                             "); the fiducial data is informationally incomplete");
    const Eigen::Matrix4d ct = target_prep_columns();
    const Eigen::Matrix4d ct_inv = ct.inverse();
    const Eigen::Matrix4d gram_inv = data.gram.inverse();
    GateSetEstimate est;
    est.gx = ct * gram_inv * data.p_gx * ct_inv;
    est.gy = ct * gram_inv * data.p_gy * ct_inv;
    est.rho = ct * gram_inv * data.rho_vec;
    est.e0 = (data.gram.row(0) * ct_inv).transpose();
    return est;
}

GateSetEstimate apply_gauge(const GateSetEstimate& est, const Eigen::Matrix4d& m) {
    const Eigen::Matrix4d mi = m.inverse();
    GateSetEstimate out;
    out.rho = m * est.rho;
    out.gx = m * est.gx * mi;
    out.gy = m * est.gy * mi;
    out.e0 = (est.e0.transpose() * mi).transpose();
    return out;
}

double gauge_objective(const GateSetEstimate& est, const GateSetEstimate& target, const GaugeWeights& w) {
    // ||sum_s v_s s||_F^2 = 2 |v|^2 for rho, and ||sum_s e_s s / 2||_F^2 = |e|^2 / 2 for effects.
    return w.rho * 2.0 * (est.rho - target.rho).squaredNorm() + w.gx * (est.gx - target.gx).squaredNorm() +
           w.gy * (est.gy - target.gy).squaredNorm() + w.e0 * 0.5 * (est.e0 - target.e0).squaredNorm();
}

GateSetEstimate cptp_clip(const GateSetEstimate& est) {
    GateSetEstimate out = est;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> se(est.e0_matrix());
    const Eigen::Vector2d ev = se.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
    const Eigen::Matrix2cd e = se.eigenvectors() * ev.asDiagonal() * se.eigenvectors().adjoint();
    out.e0 = effect_vector(e);

    CMatrix r = from_pauli_vector(est.rho);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> sr(Eigen::Matrix2cd(0.5 * (r + r.adjoint())));
    Eigen::Vector2d rv = sr.eigenvalues().cwiseMax(0.0);
    if (rv.sum() <= 0.0) throw NumericalError("gauge optimization produced a state with no positive weight");
    rv /= rv.sum();
    const Eigen::Matrix2cd rho = sr.eigenvectors() * rv.asDiagonal() * sr.eigenvectors().adjoint();
    out.rho = pauli_vector(rho);
    // trace preservation: first PTM row of every gate is (1, 0, 0, 0)
    out.gx.row(0) = Eigen::RowVector4d::UnitX();
    out.gy.row(0) = Eigen::RowVector4d::UnitX();
    return out;
}

LMatrix estimate_L(const GateSetEstimate& est) {
    const Eigen::Matrix4d gx2 = est.gx * est.gx;
    const std::array<Eigen::Vector4d, 4> fids{est.rho, gx2 * est.rho, est.gy * est.rho, gx2 * est.gx * est.rho};
    Eigen::Matrix4d m;
    for (int l = 0; l < 4; ++l) {
        const Eigen::Matrix2cd op = from_pauli_vector(fids[static_cast<std::size_t>(l)]);
        m.row(l) = quasiprob_coeffs(Eigen::Matrix2cd(0.5 * (op + op.adjoint()))).vector().transpose();
    }
    return LMatrix(m);
}

GaugeResult gauge_optimize(const GateSetEstimate& est, const GateSetEstimate& target, const GaugeWeights& weights) {
    using Params = Eigen::Matrix<double, 12, 1>;
    if (weights.rho < 0 || weights.gx < 0 || weights.gy < 0 || weights.e0 < 0)
        throw DomainError("gauge_optimize: weights must be nonnegative");
    auto f = [&](const Params& k) { return gauge_objective(apply_gauge(est, gauge_from_params(k)), target, weights); };
    auto grad = [&](const Params& k) {
        constexpr double h = 1e-7;
        Params g;
        for (int i = 0; i < 12; ++i) {
            Params kp = k, km = k;
            kp(i) += h;
            km(i) -= h;
            g(i) = (f(kp) - f(km)) / (2 * h);
        }
        return g;
    };

    constexpr int kMaxIter = 10000;
    constexpr double kTol = 1e-12;
    Params k = Params::Zero();
    double fk = f(k);
    const double f0 = fk;
    if (!std::isfinite(fk)) throw NumericalError("gauge_optimize: objective is not finite at the identity gauge");
    Params g = grad(k);
    double alpha = 1.0;
    int it = 0;
    for (; it < kMaxIter; ++it) {
        const double gg = g.squaredNorm();
        if (gg == 0.0) break;
        double step = alpha;
        Params next;
        double fn = fk;
        bool accepted = false;
        for (int bt = 0; bt < 100; ++bt) {
            next = k - step * g;
            fn = f(next);
            if (std::isfinite(fn) && fn <= fk - 1e-4 * step * gg) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (fn > fk) throw NumericalError("gauge_optimize: objective increased during line search");
        const Params gn = grad(next);
        const Params s = next - k, y = gn - g;
        const double sy = s.dot(y);
        alpha = sy > 0.0 ? s.squaredNorm() / sy : 1.0;
        const double change = fk - fn;
        k = next;
        fk = fn;
        g = gn;
        if (change < kTol) {
            ++it;
            break;
        }
    }
    GaugeResult out;
    out.gauge = gauge_from_params(k);
    out.estimate = cptp_clip(apply_gauge(est, out.gauge));
    out.initial_objective = f0;
    out.objective = fk;
    out.iterations = it;
    return out;
}

Eigen::Vector4d eigenvalue_magnitudes(const Eigen::Matrix4d& g) {
    Eigen::Vector4d m = Eigen::EigenSolver<Eigen::Matrix4d>(g, false).eigenvalues().cwiseAbs();
    std::sort(m.data(), m.data() + 4, std::greater<>());
    return m;
}

GaugeResult run_gst(const SingleQubitNoise& sq, const Eigen::Matrix2cd& e0, const Shots& shots, std::uint64_t seed,
                    const GaugeWeights& weights) {
    return gauge_optimize(lgst_estimate(simulate_gst_data(sq, e0, shots, seed)), GateSetEstimate::ideal(), weights);
}

}  // namespace tmem
