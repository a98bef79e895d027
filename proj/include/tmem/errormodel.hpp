#pragma once

// Planted noise models: depolarized |0> preparation and pi/2 gates on every
// qubit, plus a correlated multiqubit readout POVM.

#include <cstdint>
#include <random>
#include <vector>

#include "tmem/qcore.hpp"
#include "tmem/stochastic.hpp"

namespace tmem {

using Rng = std::mt19937_64;

/// splitmix64 finalizer over (seed, a, b); used for per-replica / per-circuit streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

struct SingleQubitNoise {
    DensityMatrix rho0;
    Ptm gx;
    Ptm gy;

    static SingleQubitNoise ideal();
};

struct ErrorModel {
    int n = 0;
    std::vector<SingleQubitNoise> per_qubit;
    Povm povm;

    ErrorModel(int n_qubits, std::vector<SingleQubitNoise> noise, Povm measurement);
};

struct NoiseConfig {
    int n = 4;
    double state_depol = 2e-2;
    double gate_depol = 2e-4;
    double povm_noise_target = 0.10;
    /// Upper bound of the random fraction u moved per POVM randomization step.
    double povm_step = 5e-3;
    std::uint64_t seed = 2021;

    void validate() const;
};

/// PTM of rho -> (1-p) rho + p I/2 on one qubit.
Ptm depolarizing_ptm(double p, int n = 1);

/// Depolarized |0>, and depolarized ideal pi/2 rotations about X and Y.
SingleQubitNoise planted_single_qubit(double state_depol, double gate_depol);

ErrorModel build_planted_model(const NoiseConfig& cfg, Rng& rng);

/// Random walk on the response matrix: move delta = u * min(R(x1|s), 1 - R(x2|s)) from outcome x1 to
/// x2 in column s with u uniform in (0, step], until ||R - I||_F hits the target (the last move is
/// shortened so the norm lands on it).
DiagonalPovm random_diagonal_povm(int n, double target, Rng& rng, double step = 5e-3);

/// Non-diagonal POVM: E_x = S^-1/2 A_x S^-1/2 with A_x = (1-w)|x><x| + w G_x G_x^dagger.
GeneralPovm random_general_povm(int n, double strength, Rng& rng);

/// Random physical preparation and gate errors: depolarizing plus a small coherent over-rotation.
SingleQubitNoise random_single_qubit_noise(double strength, Rng& rng);

/// Gate list preparing the n = 3 or n = 4 GHZ target from |0...0>.
std::vector<GateOp> ghz_circuit(int n);
/// (|0..0> + i|1..1>)/sqrt2 for n = 3, (|0000> + e^{3 pi i/4}|1111>)/sqrt2 for n = 4.
CVector ghz_target(int n);

/// (1 - eta)|psi><psi| + eta I/d.
DensityMatrix depolarized_ghz(int n, double eta);

/// Gamma(x|x') = tr(E_x |x'><x'|).
ColumnStochasticMatrix true_gamma(const ErrorModel& model);

/// Tensor product of rho0 (bit 0) or G_x^2 rho0 (bit 1) on each qubit.
DensityMatrix prepared_classical_state(const ErrorModel& model, long x);
DensityMatrix prepared_classical_state(const ErrorModel& model, const std::vector<int>& bits);

/// Effective single-qubit effect for outcome 0 on `qubit`, the other qubits held in their rho0.
Eigen::Matrix2cd marginal_effect(const ErrorModel& model, int qubit);

/// Partial trace keeping one qubit of an n-qubit operator.
Eigen::Matrix2cd reduce_to_qubit(const CMatrix& op, int qubit, int n);

/// Applies a single-qubit PTM to a single-qubit state.
DensityMatrix apply_gate(const Ptm& g, const DensityMatrix& rho);

}  // namespace tmem
