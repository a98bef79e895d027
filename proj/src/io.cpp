#include "tmem/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace tmem {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

long long parse_integer(const std::string& text, const std::string& what) {
    long long v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(what + ": expected an integer, got '" + text + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(what + ": expected an unsigned 64-bit integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(what + ": expected true or false, got '" + text + "'");
}

}  // namespace

Shots parse_shots(const std::string& text, const std::string& what) {
    if (text == "exact") return Shots::exact();
    const long long v = parse_integer(text, what);
    if (v < 1) throw ConfigError(what + ": shots must be >= 1 or 'exact'");
    return Shots::of(v);
}

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

std::string csv_row(const std::string& head, const std::vector<std::string>& cells) {
    return head + (cells.empty() ? "" : "," + join(cells, ",")) + "\n";
}

}  // namespace

std::string format_double(double v) {
    if (v == 0.0) return "0";  // folds -0
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw DomainError("format_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const std::string t = trim(text);
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ConfigError(what + ": expected a number, got '" + text + "'");
    return v;
}

void RunConfig::validate() const {
    if (n < 1 || n > 10) throw ConfigError("global.n: must be in [1, 10]");
    if (replicas < 1) throw ConfigError("global.replicas: must be >= 1");
    if (out_dir.empty()) throw ConfigError("global.out_dir: must not be empty");
    if (!(state_depol >= 0 && state_depol <= 1)) throw ConfigError("noise.state_depol: must be in [0, 1]");
    if (!(gate_depol >= 0 && gate_depol <= 1)) throw ConfigError("noise.gate_depol: must be in [0, 1]");
    if (!(povm_noise_target >= 0)) throw ConfigError("noise.povm_noise_target: must be >= 0");
    if (!(povm_step > 0 && povm_step <= 1)) throw ConfigError("noise.povm_step: must be in (0, 1]");
    for (const auto& [v, key] : {std::pair{weights.rho, "gst.weight_rho"}, std::pair{weights.gx, "gst.weight_gx"},
                                  std::pair{weights.gy, "gst.weight_gy"}, std::pair{weights.e0, "gst.weight_e0"}})
        if (!(v >= 0)) throw ConfigError(std::string(key) + ": must be >= 0");
    if (weights.rho + weights.gx + weights.gy + weights.e0 <= 0) throw ConfigError("gst: at least one weight must be positive");
    if (order != 3 && order != 4) throw ConfigError("mermin.order: must be 3 or 4");
    if (!(eta >= 0 && eta <= 1)) throw ConfigError("mermin.eta: must be in [0, 1]");
    if (eta_grid.empty()) throw ConfigError("mermin.eta_grid: must not be empty");
    for (double e : eta_grid)
        if (!(e >= 0 && e <= 1)) throw ConfigError("mermin.eta_grid: values must be in [0, 1]");
    if (corrections.empty()) throw ConfigError("mermin.corrections: must not be empty");
    for (const auto& c : corrections)
        if (c != "raw" && c != "T" && c != "gamma")
            throw ConfigError("mermin.corrections: unknown correction '" + c + "' (expected raw, T, gamma)");
    if (qpt_max_qubits < 1) throw ConfigError("qpt.max_qubits: must be >= 1");
    if (qpt_n < 1 || qpt_n > 10) throw ConfigError("qpt.n: must be in [1, 10]");
    if (!(qpt_povm_noise_target >= 0)) throw ConfigError("qpt.povm_noise_target: must be >= 0");
    try {
        ChannelSpec::parse(channel);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("qpt.channel: ") + e.what());
    }
}

NoiseConfig RunConfig::noise() const {
    NoiseConfig c;
    c.n = n;
    c.state_depol = state_depol;
    c.gate_depol = gate_depol;
    c.povm_noise_target = povm_noise_target;
    c.povm_step = povm_step;
    c.seed = seed;
    return c;
}

MerminConfig RunConfig::mermin() const {
    MerminConfig m;
    m.noise = noise();
    m.noise.n = order;
    m.order = order;
    m.replicas = replicas;
    m.bypass_gst = bypass_gst;
    m.shots = shots;
    m.weights = weights;
    return m;
}

bool RunConfig::wants(const std::string& correction) const {
    return std::find(corrections.begin(), corrections.end(), correction) != corrections.end();
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::string section;
    std::set<std::string> seen;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "global" && section != "noise" && section != "gst" && section != "mermin" && section != "qpt")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string full = section + "." + key;
        if (!seen.insert(full).second) throw ConfigError(full + ": duplicate key");

        if (full == "global.n") c.n = static_cast<int>(parse_integer(value, full));
        else if (full == "global.seed") c.seed = parse_u64(value, full);
        else if (full == "global.replicas") c.replicas = static_cast<int>(parse_integer(value, full));
        else if (full == "global.shots") c.shots = parse_shots(value, full);
        else if (full == "global.out_dir") c.out_dir = value;
        else if (full == "noise.state_depol") c.state_depol = parse_double(value, full);
        else if (full == "noise.gate_depol") c.gate_depol = parse_double(value, full);
        else if (full == "noise.povm_noise_target") c.povm_noise_target = parse_double(value, full);
        else if (full == "noise.povm_step") c.povm_step = parse_double(value, full);
        else if (full == "gst.bypass") c.bypass_gst = parse_bool(value, full);
        else if (full == "gst.weight_rho") c.weights.rho = parse_double(value, full);
        else if (full == "gst.weight_gx") c.weights.gx = parse_double(value, full);
        else if (full == "gst.weight_gy") c.weights.gy = parse_double(value, full);
        else if (full == "gst.weight_e0") c.weights.e0 = parse_double(value, full);
        else if (full == "mermin.order") c.order = static_cast<int>(parse_integer(value, full));
        else if (full == "mermin.eta") c.eta = parse_double(value, full);
        else if (full == "mermin.eta_grid") {
            c.eta_grid.clear();
            for (const auto& part : split(value, ',')) c.eta_grid.push_back(parse_double(part, full));
        } else if (full == "mermin.corrections") {
            c.corrections = split(value, ',');
        } else if (full == "qpt.n") c.qpt_n = static_cast<int>(parse_integer(value, full));
        else if (full == "qpt.channel") c.channel = value;
        else if (full == "qpt.povm_noise_target") c.qpt_povm_noise_target = parse_double(value, full);
        else if (full == "qpt.max_qubits") c.qpt_max_qubits = static_cast<int>(parse_integer(value, full));
        else throw ConfigError("unknown key '" + full + "'");
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::vector<std::string> grid;
    for (double e : c.eta_grid) grid.push_back(format_double(e));
    std::ostringstream os;
    os << "[global]\n"
       << "n = " << c.n << "\n"
       << "seed = " << c.seed << "\n"
       << "replicas = " << c.replicas << "\n"
       << "shots = " << c.shots.str() << "\n"
       << "out_dir = " << c.out_dir << "\n\n"
       << "[noise]\n"
       << "state_depol = " << format_double(c.state_depol) << "\n"
       << "gate_depol = " << format_double(c.gate_depol) << "\n"
       << "povm_noise_target = " << format_double(c.povm_noise_target) << "\n"
       << "povm_step = " << format_double(c.povm_step) << "\n\n"
       << "[gst]\n"
       << "bypass = " << (c.bypass_gst ? "true" : "false") << "\n"
       << "weight_rho = " << format_double(c.weights.rho) << "\n"
       << "weight_gx = " << format_double(c.weights.gx) << "\n"
       << "weight_gy = " << format_double(c.weights.gy) << "\n"
       << "weight_e0 = " << format_double(c.weights.e0) << "\n\n"
       << "[mermin]\n"
       << "order = " << c.order << "\n"
       << "eta = " << format_double(c.eta) << "\n"
       << "eta_grid = " << join(grid, ", ") << "\n"
       << "corrections = " << join(c.corrections, ", ") << "\n\n"
       << "[qpt]\n"
       << "n = " << c.qpt_n << "\n"
       << "channel = " << c.channel << "\n"
       << "povm_noise_target = " << format_double(c.qpt_povm_noise_target) << "\n"
       << "max_qubits = " << c.qpt_max_qubits << "\n";
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& m) {
    if (static_cast<Eigen::Index>(m.row_labels.size()) != m.values.rows() ||
        static_cast<Eigen::Index>(m.col_labels.size()) != m.values.cols())
        throw DomainError("write_matrix_csv: label count does not match the matrix");
    std::string out = csv_row(m.corner, m.col_labels);
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
        std::vector<std::string> cells;
        for (Eigen::Index c = 0; c < m.values.cols(); ++c) cells.push_back(format_double(m.values(r, c)));
        out += csv_row(m.row_labels[static_cast<std::size_t>(r)], cells);
    }
    write_text(path, out);
}

LabeledMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    LabeledMatrix m;
    std::string line;
    if (!std::getline(in, line)) throw DomainError(path.string() + ": empty file");
    auto header = split(trim(line), ',');
    m.corner = header.front();
    m.col_labels.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split(trim(line), ',');
        if (cells.size() != header.size()) throw DomainError(path.string() + ": ragged row");
        m.row_labels.push_back(cells.front());
        std::vector<double> r;
        for (std::size_t i = 1; i < cells.size(); ++i) r.push_back(parse_double(cells[i], path.string()));
        rows.push_back(std::move(r));
    }
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.col_labels.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

std::vector<std::string> outcome_labels(int n) {
    std::vector<std::string> out;
    for (long x = 0; x < dim_of(n); ++x) out.push_back(bitstring(x, n));
    return out;
}

std::vector<std::string> pauli_labels(int n) {
    std::vector<std::string> out;
    for (long w = 0; w < (1L << (2 * n)); ++w) out.push_back(PauliString::from_index(w, n).str());
    return out;
}

LabeledMatrix stochastic_csv(const ColumnStochasticMatrix& m, int n) {
    return {"prepared", outcome_labels(n), outcome_labels(n), m.matrix().transpose()};
}

ColumnStochasticMatrix stochastic_from_csv(const LabeledMatrix& m) {
    return ColumnStochasticMatrix(m.values.transpose());
}

LabeledMatrix l_matrix_csv(const LMatrix& L) {
    std::vector<std::string> labels;
    for (int l = 0; l < 4; ++l) labels.push_back(fiducial_label(l));
    return {"lambda", labels, labels, L.matrix()};
}

LabeledMatrix table_csv(const CalibrationTable& table) {
    std::vector<std::string> rows;
    for (long w = 0; w < table.words(); ++w) rows.push_back(lambda_word_label(w, table.qubits()));
    return {"lambda_word", rows, outcome_labels(table.qubits()), table.as_matrix()};
}

LabeledMatrix ptm_csv(const Ptm& ptm, int n) {
    return {"sigma", pauli_labels(n), pauli_labels(n), ptm};
}

std::string format_gateset(const GateSetEstimate& g) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    auto clean = [](double v) { return std::abs(v) < 5e-5 ? 0.0 : v; };
    auto print = [&](const std::string& name, const RMatrix& m) {
        os << name << "\n";
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? " " : "") << std::setw(8) << clean(m(r, c));
            os << "\n";
        }
        os << "\n";
    };
    const CMatrix rho = g.rho0().matrix();
    const CMatrix e = g.e0_matrix();
    // States and effects are real up to round-off for the planted models; imaginary parts are listed separately.
    print("rho0 (real part)", rho.real());
    print("rho0 (imaginary part)", rho.imag());
    print("Gx", g.gx);
    print("Gy", g.gy);
    print("E0 (real part)", e.real());
    print("E0 (imaginary part)", e.imag());
    return os.str();
}

}  // namespace tmem
