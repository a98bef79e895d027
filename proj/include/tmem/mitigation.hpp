#pragma once

// Distribution correction, Mermin polynomials on noisy GHZ states and
// SPAM-corrected process tomography.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tmem/calibration.hpp"
#include "tmem/gst.hpp"

namespace tmem {

struct SimplexSolveOptions {
    double kkt_tol = 1e-10;
    /// Failure threshold when the iteration cap is hit.
    double accept_tol = 1e-8;
    long max_iter = 100000;
};

struct SimplexSolveResult {
    RVector p;
    double objective = 0.0;   // ||A p - q||^2
    double kkt_residual = 0.0;
    long iterations = 0;
};

/// Natural-map residual ||p - P(p - grad)||_inf of 1/2 ||A p - q||^2 on the simplex.
double simplex_kkt_residual(const RMatrix& a, const RVector& q, const RVector& p);

/// argmin ||A p - q||_2^2 over the probability simplex (accelerated projected gradient + support polish).
SimplexSolveResult solve_simplex_least_squares(const RMatrix& a, const RVector& q, const SimplexSolveOptions& opts = {});

ProbabilityDistribution correct_distribution(const ColumnStochasticMatrix& a, const ProbabilityDistribution& q);

/// Signed Pauli words of M3 or M4.
const std::vector<std::pair<PauliString, double>>& mermin_terms(int order);
double mermin_value(const std::map<PauliString, double>& expectations, int order);
/// Ideal maximum: 4 for M3, 8 sqrt2 for M4.
double mermin_quantum_max(int order);

struct ReplicaStats {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample standard deviation / sqrt(N); zero for N = 1.
ReplicaStats replica_stats(const std::vector<double>& values);

struct MerminValues {
    double exact = 0.0;
    double raw = 0.0;
    double t_corrected = 0.0;
    double gamma_corrected = 0.0;
};

struct MerminReplica {
    int replica = 0;
    std::uint64_t seed = 0;
    MerminValues values;
    std::map<PauliString, MerminValues> terms;
};

struct MerminReport {
    int order = 4;
    double eta = 0.2;
    std::vector<MerminReplica> replicas;
    ReplicaStats exact, raw, t_corrected, gamma_corrected;
    /// Replica means per word.
    std::map<PauliString, MerminValues> term_means;
};

struct MerminConfig {
    NoiseConfig noise;
    int order = 4;
    int replicas = 16;
    bool bypass_gst = false;
    Shots shots = Shots::exact();
    GaugeWeights weights;
};

/// Per-replica calibration: model, L matrices (GST or exact), T and Gamma.
struct ReplicaCalibration {
    int replica = 0;
    std::uint64_t seed = 0;
    ErrorModel model;
    std::vector<GaugeResult> gst;   // empty when GST is bypassed
    std::vector<LMatrix> Ls;
    ColumnStochasticMatrix T;
    ColumnStochasticMatrix gamma;
};

/// Seed of replica r: derive_seed(seed, 100, r).
std::uint64_t replica_seed(std::uint64_t seed, int replica);

ReplicaCalibration calibrate_replica(const NoiseConfig& noise, int replica, bool bypass_gst, const Shots& shots,
                                     const GaugeWeights& weights = {});

/// Measures every Mermin word on depolarized_ghz(n, eta) through the replica's POVM and corrects it.
MerminReplica evaluate_mermin(const ReplicaCalibration& cal, int order, double eta, const Shots& shots);

MerminReport run_mermin_pipeline(const MerminConfig& cfg, double eta);

/// Calibrates each replica once and reuses it across the grid.
std::vector<MerminReport> eta_sweep(const MerminConfig& cfg, const std::vector<double>& etas);

/// Rows express I, X, Y, Z in the {pi_0, pi_1, pi_+, pi_+i} basis.
const Eigen::Matrix4d& pauli_to_state_matrix();

struct ChannelSpec {
    std::string name;   // identity | depolarizing | unitary gate name | cnot
    double p = 0.0;

    static ChannelSpec parse(const std::string& text);
    std::string str() const;
};

/// True PTM of the channel on n qubits (named unitaries act on every qubit).
Ptm channel_ptm(const ChannelSpec& spec, int n);

struct QptOptions {
    int max_qubits = 3;
    Shots shots = Shots::exact();
    std::uint64_t seed = 0;
    /// Replaces pauli_to_state_matrix(); the selftest uses it to plant a fault.
    std::optional<Eigen::Matrix4d> pauli_to_state;
};

/// Prepares every lambda-word, applies the channel, measures each Pauli word with Gamma correction and
/// contracts with (M L^-1)^{(x)n}.
Ptm qpt_reconstruct(const ErrorModel& model, const Ptm& channel, const std::vector<LMatrix>& Ls,
                    const ColumnStochasticMatrix& gamma, const QptOptions& opts = {});

}  // namespace tmem
