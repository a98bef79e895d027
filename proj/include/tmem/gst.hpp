#pragma once

// Single-qubit linear-inversion gate set tomography with gauge fixing.
//
// Preparation fiducials F = {{}, Gx^2, Gy, Gx^3}, measurement fiducials
// M = {{}, Gx, Gy, Gx^2}. Data tables are indexed (j, k) = (M_j, F_k).

#include <cstdint>

#include "tmem/calibration.hpp"
#include "tmem/errormodel.hpp"

namespace tmem {

struct LgstData {
    Eigen::Matrix4d gram;       // <<E0| M_j F_k |rho0>>
    Eigen::Matrix4d p_gx;       // <<E0| M_j Gx F_k |rho0>>
    Eigen::Matrix4d p_gy;
    Eigen::Vector4d rho_vec;    // <<E0| M_j |rho0>>
};

/// Gate set in Pauli coordinates: rho as tr(rho sigma)/2, e0 as tr(E0 sigma).
struct GateSetEstimate {
    Eigen::Vector4d rho;
    Eigen::Matrix4d gx;
    Eigen::Matrix4d gy;
    Eigen::Vector4d e0;

    static GateSetEstimate ideal();
    static GateSetEstimate from_model(const SingleQubitNoise& sq, const Eigen::Matrix2cd& e0);

    DensityMatrix rho0() const;
    Eigen::Matrix2cd e0_matrix() const;
    SingleQubitNoise as_noise() const;
};

struct GaugeWeights {
    double rho = 1.0;
    double gx = 1.0;
    double gy = 1.0;
    double e0 = 1.0;
};

struct GaugeResult {
    GateSetEstimate estimate;
    Eigen::Matrix4d gauge;
    double initial_objective = 0.0;
    double objective = 0.0;
    int iterations = 0;
};

LgstData simulate_gst_data(const SingleQubitNoise& sq, const Eigen::Matrix2cd& e0, const Shots& shots,
                           std::uint64_t seed);

/// Probabilities a gate set predicts for the LGST circuits.
LgstData predict_gst_data(const GateSetEstimate& est);

/// Estimate in the gauge where the preparation fiducials sit at their ideal positions.
GateSetEstimate lgst_estimate(const LgstData& data, double max_condition = 1e8);

/// rho -> M rho, G -> M G M^-1, E -> E M^-1.
GateSetEstimate apply_gauge(const GateSetEstimate& est, const Eigen::Matrix4d& m);

/// Weighted squared Frobenius distance; rho and E0 are compared as 2x2 operators.
double gauge_objective(const GateSetEstimate& est, const GateSetEstimate& target, const GaugeWeights& w);

/// Gradient descent over M = exp(K), first row of K zero, followed by a CPTP clip.
GaugeResult gauge_optimize(const GateSetEstimate& est, const GateSetEstimate& target = GateSetEstimate::ideal(),
                           const GaugeWeights& weights = {});

/// Clips E0 eigenvalues into [0, 1] and rho eigenvalues to >= 0 with unit trace; makes both gates
/// trace preserving.
GateSetEstimate cptp_clip(const GateSetEstimate& est);

/// L matrix of the estimated fiducials. Finite-shot estimates may leave the Bloch ball slightly, so no
/// positivity is required here.
LMatrix estimate_L(const GateSetEstimate& est);

/// |eigenvalues| sorted descending.
Eigen::Vector4d eigenvalue_magnitudes(const Eigen::Matrix4d& g);

/// Simulate, invert and gauge-fix in one call.
GaugeResult run_gst(const SingleQubitNoise& sq, const Eigen::Matrix2cd& e0, const Shots& shots, std::uint64_t seed,
                    const GaugeWeights& weights = {});

}  // namespace tmem
