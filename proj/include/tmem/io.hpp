#pragma once

// Run configuration (sectioned key = value text) and CSV matrix files.

#include <filesystem>
#include <string>
#include <vector>

#include "tmem/mitigation.hpp"

namespace tmem {

/// Malformed or out-of-range configuration; maps to exit code 2.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

struct RunConfig {
    // [global]
    int n = 4;
    std::uint64_t seed = 2021;
    int replicas = 16;
    Shots shots = Shots::exact();
    std::string out_dir = "out";
    // [noise]
    double state_depol = 2e-2;
    double gate_depol = 2e-4;
    double povm_noise_target = 0.10;
    double povm_step = 5e-3;
    // [gst]
    bool bypass_gst = false;
    GaugeWeights weights;
    // [mermin]
    int order = 4;
    double eta = 0.2;
    std::vector<double> eta_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<std::string> corrections{"raw", "T", "gamma"};
    // [qpt]
    int qpt_n = 1;
    std::string channel = "depolarizing:0.1";
    double qpt_povm_noise_target = 0.02;
    int qpt_max_qubits = 3;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    NoiseConfig noise() const;
    MerminConfig mermin() const;
    bool wants(const std::string& correction) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Every key in a fixed order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& what);
/// Positive integer or "exact".
Shots parse_shots(const std::string& text, const std::string& what);

struct LabeledMatrix {
    std::string corner;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    RMatrix values;
};

void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& m);
LabeledMatrix read_matrix_csv(const std::filesystem::path& path);

/// Outcome labels "0000".."1111".
std::vector<std::string> outcome_labels(int n);
/// Pauli word labels in index order.
std::vector<std::string> pauli_labels(int n);

/// T and Gamma files hold one row per prepared word (the transpose of the matrix).
LabeledMatrix stochastic_csv(const ColumnStochasticMatrix& m, int n);
ColumnStochasticMatrix stochastic_from_csv(const LabeledMatrix& m);
LabeledMatrix l_matrix_csv(const LMatrix& L);
LabeledMatrix table_csv(const CalibrationTable& table);
LabeledMatrix ptm_csv(const Ptm& ptm, int n);

/// Four-decimal text rendering of a gate set.
std::string format_gateset(const GateSetEstimate& g);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tmem
