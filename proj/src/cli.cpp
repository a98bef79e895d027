#include "tmem/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tmem/selftest.hpp"

namespace tmem {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("global.out_dir: cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

Json config_json(const RunConfig& c) {
    Json j;
    j["global"] = {{"n", c.n}, {"seed", c.seed}, {"replicas", c.replicas}, {"shots", c.shots.str()},
                   {"out_dir", c.out_dir}};
    j["noise"] = {{"state_depol", c.state_depol}, {"gate_depol", c.gate_depol},
                  {"povm_noise_target", c.povm_noise_target}, {"povm_step", c.povm_step}};
    j["gst"] = {{"bypass", c.bypass_gst}, {"weight_rho", c.weights.rho}, {"weight_gx", c.weights.gx},
                {"weight_gy", c.weights.gy}, {"weight_e0", c.weights.e0}};
    j["mermin"] = {{"order", c.order}, {"eta", c.eta}, {"eta_grid", c.eta_grid}, {"corrections", c.corrections}};
    j["qpt"] = {{"n", c.qpt_n}, {"channel", c.channel}, {"povm_noise_target", c.qpt_povm_noise_target},
                {"max_qubits", c.qpt_max_qubits}};
    return j;
}

Json report_head(const std::string& command, const RunConfig& cfg) {
    Json j;
    j["command"] = command;
    j["tool_version"] = kToolVersion;
    j["seed"] = cfg.seed;
    j["config"] = config_json(cfg);
    return j;
}

void finish_report(Json& j, std::vector<std::string>& files, const fs::path& dir, const std::string& name) {
    files.push_back(name);
    j["files"] = files;
    write_text(dir / name, j.dump(2) + "\n");
}

Json stats_json(const ReplicaStats& s) { return {{"mean", s.mean}, {"std_error", s.std_error}}; }

Json values_json(const MerminValues& v, const RunConfig& cfg) {
    Json j;
    j["exact"] = v.exact;
    if (cfg.wants("raw")) j["raw"] = v.raw;
    if (cfg.wants("T")) j["T"] = v.t_corrected;
    if (cfg.wants("gamma")) j["gamma"] = v.gamma_corrected;
    return j;
}

/// Column headers and values in the order exact, raw, T, gamma, filtered by the configured corrections.
std::vector<std::string> value_columns(const RunConfig& cfg) {
    std::vector<std::string> cols{"exact"};
    for (const char* c : {"raw", "T", "gamma"})
        if (cfg.wants(c)) cols.emplace_back(c);
    return cols;
}

double pick(const MerminValues& v, const std::string& col) {
    if (col == "exact") return v.exact;
    if (col == "raw") return v.raw;
    if (col == "T") return v.t_corrected;
    return v.gamma_corrected;
}

MerminValues means_of(const MerminReport& r) {
    return {r.exact.mean, r.raw.mean, r.t_corrected.mean, r.gamma_corrected.mean};
}

Json mermin_report_json(const MerminReport& rep, const RunConfig& cfg) {
    Json j;
    j["order"] = rep.order;
    j["eta"] = rep.eta;
    j["replicas"] = rep.replicas.size();
    Json agg;
    agg["exact"] = stats_json(rep.exact);
    if (cfg.wants("raw")) agg["raw"] = stats_json(rep.raw);
    if (cfg.wants("T")) agg["T"] = stats_json(rep.t_corrected);
    if (cfg.wants("gamma")) agg["gamma"] = stats_json(rep.gamma_corrected);
    j["aggregate"] = agg;
    Json terms = Json::object();
    for (const auto& [w, v] : rep.term_means) terms[w.str()] = values_json(v, cfg);
    j["term_means"] = terms;
    Json per = Json::array();
    for (const auto& r : rep.replicas) {
        Json e = {{"replica", r.replica}, {"seed", r.seed}};
        e["values"] = values_json(r.values, cfg);
        per.push_back(e);
    }
    j["per_replica"] = per;
    return j;
}

}  // namespace

std::vector<std::string> cmd_calibrate(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = prepare_out(cfg);
    const ReplicaCalibration cal = calibrate_replica(cfg.noise(), 0, cfg.bypass_gst, cfg.shots, cfg.weights);
    const int n = cal.model.n;
    std::vector<std::string> files;

    write_matrix_csv(dir / "T.csv", stochastic_csv(cal.T, n));
    files.emplace_back("T.csv");
    write_matrix_csv(dir / "gamma.csv", stochastic_csv(cal.gamma, n));
    files.emplace_back("gamma.csv");
    try {
        const ColumnStochasticMatrix back = stochastic_from_csv(read_matrix_csv(dir / "gamma.csv"));
        if (back.matrix() != cal.gamma.matrix()) throw NumericalError("values changed on re-read");
    } catch (const DomainError& e) {
        throw NumericalError(std::string("gamma.csv failed validation on re-read: ") + e.what());
    }

    for (int q = 0; q < n; ++q) {
        const std::string lname = "L_q" + std::to_string(q) + ".csv";
        write_matrix_csv(dir / lname, l_matrix_csv(cal.Ls[static_cast<std::size_t>(q)]));
        files.push_back(lname);
        const std::string gname = "gateset_q" + std::to_string(q) + ".txt";
        std::string text;
        if (cal.gst.empty()) {
            text = "# GST bypassed: planted gate set\n\n" +
                   format_gateset(GateSetEstimate::from_model(cal.model.per_qubit[static_cast<std::size_t>(q)],
                                                              marginal_effect(cal.model, q)));
        } else {
            text = "# gauge-optimized estimate\n\n" + format_gateset(cal.gst[static_cast<std::size_t>(q)].estimate);
        }
        write_text(dir / gname, text);
        files.push_back(gname);
    }
    write_matrix_csv(dir / "calibration_table.csv",
                     table_csv(measure_calibration_table(cal.model, cfg.shots, derive_seed(cal.seed, 31))));
    files.emplace_back("calibration_table.csv");

    Json j = report_head("calibrate", cfg);
    j["replica"] = cal.replica;
    j["replica_seed"] = cal.seed;
    const RMatrix g_true = true_gamma(cal.model).matrix();
    j["frobenius"] = {{"gamma_minus_T", (cal.gamma.matrix() - cal.T.matrix()).norm()},
                      {"gamma_minus_true_gamma", (cal.gamma.matrix() - g_true).norm()},
                      {"T_minus_true_gamma", (cal.T.matrix() - g_true).norm()},
                      {"true_gamma_minus_identity", (g_true - RMatrix::Identity(g_true.rows(), g_true.cols())).norm()}};
    Json qubits = Json::array();
    for (int q = 0; q < n; ++q) {
        Json e = {{"qubit", q}, {"L_condition_number", cal.Ls[static_cast<std::size_t>(q)].condition_number()}};
        if (!cal.gst.empty()) {
            const GaugeResult& g = cal.gst[static_cast<std::size_t>(q)];
            e["gauge_objective_initial"] = g.initial_objective;
            e["gauge_objective"] = g.objective;
            e["gauge_iterations"] = g.iterations;
        }
        qubits.push_back(e);
    }
    j["qubits"] = qubits;
    finish_report(j, files, dir, "calibrate_report.json");
    log << "calibrate: n=" << n << ", ||Gamma - T||_F = " << (cal.gamma.matrix() - cal.T.matrix()).norm() << "\n";
    return files;
}

std::vector<std::string> cmd_mermin(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = prepare_out(cfg);
    const MerminReport rep = run_mermin_pipeline(cfg.mermin(), cfg.eta);
    std::vector<std::string> files;

    const auto cols = value_columns(cfg);
    std::vector<std::string> rows;
    RMatrix vals(static_cast<Eigen::Index>(rep.replicas.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rep.replicas.size(); ++r) {
        rows.push_back(std::to_string(rep.replicas[r].replica));
        for (std::size_t c = 0; c < cols.size(); ++c)
            vals(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = pick(rep.replicas[r].values, cols[c]);
    }
    write_matrix_csv(dir / "per_replica.csv", {"replica", rows, cols, vals});
    files.emplace_back("per_replica.csv");

    Json j = report_head("mermin", cfg);
    j["result"] = mermin_report_json(rep, cfg);
    finish_report(j, files, dir, "mermin_report.json");

    log << "M" << rep.order << " at eta=" << rep.eta << " over " << rep.replicas.size() << " replicas\n";
    for (const auto& c : cols) {
        const ReplicaStats s = c == "exact" ? rep.exact : c == "raw" ? rep.raw : c == "T" ? rep.t_corrected : rep.gamma_corrected;
        log << "  " << c << ": " << s.mean << " +/- " << s.std_error << "\n";
    }
    return files;
}

std::vector<std::string> cmd_sweep(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = prepare_out(cfg);
    const std::vector<MerminReport> reps = eta_sweep(cfg.mermin(), cfg.eta_grid);
    std::vector<std::string> files;

    const auto cols = value_columns(cfg);
    std::vector<std::string> rows;
    RMatrix curves(static_cast<Eigen::Index>(reps.size()), static_cast<Eigen::Index>(cols.size()));
    RMatrix diffs(static_cast<Eigen::Index>(reps.size()), static_cast<Eigen::Index>(cols.size() - 1));
    for (std::size_t i = 0; i < reps.size(); ++i) {
        rows.push_back(format_double(reps[i].eta));
        const MerminValues m = means_of(reps[i]);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            curves(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = pick(m, cols[c]);
            if (c > 0) diffs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c - 1)) = std::abs(pick(m, cols[c]) - m.exact);
        }
    }
    write_matrix_csv(dir / "sweep_curves.csv", {"eta", rows, cols, curves});
    files.emplace_back("sweep_curves.csv");
    write_matrix_csv(dir / "sweep_absdiff.csv", {"eta", rows, std::vector<std::string>(cols.begin() + 1, cols.end()), diffs});
    files.emplace_back("sweep_absdiff.csv");

    Json j = report_head("sweep", cfg);
    Json pts = Json::array();
    for (const auto& r : reps) {
        Json e = {{"eta", r.eta}, {"exact", stats_json(r.exact)}};
        if (cfg.wants("raw")) e["raw"] = stats_json(r.raw);
        if (cfg.wants("T")) e["T"] = stats_json(r.t_corrected);
        if (cfg.wants("gamma")) e["gamma"] = stats_json(r.gamma_corrected);
        pts.push_back(e);
    }
    j["order"] = cfg.order;
    j["points"] = pts;
    finish_report(j, files, dir, "sweep_report.json");
    log << "sweep: " << reps.size() << " eta points, M" << cfg.order << "\n";
    return files;
}

std::vector<std::string> cmd_qpt(const RunConfig& cfg, std::ostream& log) {
    if (cfg.qpt_n > cfg.qpt_max_qubits)
        throw ConfigError("qpt.n: " + std::to_string(cfg.qpt_n) + " exceeds qpt.max_qubits = " +
                          std::to_string(cfg.qpt_max_qubits));
    const fs::path dir = prepare_out(cfg);
    NoiseConfig noise = cfg.noise();
    noise.n = cfg.qpt_n;
    noise.povm_noise_target = cfg.qpt_povm_noise_target;
    const ChannelSpec spec = ChannelSpec::parse(cfg.channel);
    const ReplicaCalibration cal = calibrate_replica(noise, 0, cfg.bypass_gst, cfg.shots, cfg.weights);
    const Ptm truth = channel_ptm(spec, cfg.qpt_n);
    QptOptions opts;
    opts.max_qubits = cfg.qpt_max_qubits;
    opts.shots = cfg.shots;
    opts.seed = derive_seed(cal.seed, 50);
    const Ptm est = qpt_reconstruct(cal.model, truth, cal.Ls, cal.gamma, opts);
    std::vector<std::string> files;

    write_matrix_csv(dir / "ptm_true.csv", ptm_csv(truth, cfg.qpt_n));
    files.emplace_back("ptm_true.csv");
    write_matrix_csv(dir / "ptm_est.csv", ptm_csv(est, cfg.qpt_n));
    files.emplace_back("ptm_est.csv");

    const double dev = (est - truth).cwiseAbs().maxCoeff();
    Json j = report_head("qpt", cfg);
    j["channel"] = spec.str();
    j["n"] = cfg.qpt_n;
    j["bypass_gst"] = cfg.bypass_gst;
    j["max_abs_deviation"] = dev;
    finish_report(j, files, dir, "qpt_report.json");
    log << "qpt: " << spec.str() << " on " << cfg.qpt_n << " qubit(s), max |PTM_est - PTM_true| = " << dev << "\n";
    return files;
}

int cmd_selftest(std::uint64_t seed, bool inject_fault, std::ostream& log) {
    const auto checks = run_selftest(seed, inject_fault);
    int failed = 0;
    for (const auto& c : checks) {
        log << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (!c.passed) log << ": " << c.detail;
        log << "\n";
        failed += c.passed ? 0 : 1;
    }
    log << "selftest: " << checks.size() - static_cast<std::size_t>(failed) << "/" << checks.size() << " passed\n";
    return failed ? kExitSelftest : kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transition-matrix readout-error mitigation with Gamma-matrix calibration", "tmem"};
    app.require_subcommand(1);
    std::string config_path, out_dir, shots_text, channel;
    std::uint64_t seed = 0;
    int replicas = 0;
    bool bypass = false, inject_fault = false;
    app.add_option("--config", config_path, "config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--replicas", replicas, "number of replicas");
    app.add_option("--shots", shots_text, "shots per circuit, or 'exact'");
    app.add_flag("--bypass-gst", bypass, "use the planted L matrices instead of GST");
    auto* calibrate = app.add_subcommand("calibrate", "write T, Gamma, L and gate-set files");
    auto* mermin = app.add_subcommand("mermin", "Mermin polynomial report at one eta");
    auto* sweep = app.add_subcommand("sweep", "Mermin curves over the eta grid");
    auto* qpt = app.add_subcommand("qpt", "SPAM-corrected process tomography");
    qpt->add_option("--channel", channel, "identity | depolarizing:p | gate name | cnot");
    auto* selftest = app.add_subcommand("selftest", "invariant checks at reduced sizes");
    selftest->add_flag("--inject-fault", inject_fault, "corrupt a tomography constant; must fail");
    for (auto* sub : {calibrate, mermin, sweep, qpt, selftest}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--out")) cfg.out_dir = out_dir;
        if (app.count("--replicas")) cfg.replicas = replicas;
        if (app.count("--shots")) cfg.shots = parse_shots(shots_text, "--shots");
        if (bypass) cfg.bypass_gst = true;
        if (qpt->count("--channel")) cfg.channel = channel;
        cfg.validate();

        int code = kExitOk;
        std::vector<std::string> files;
        if (*selftest) code = cmd_selftest(cfg.seed, inject_fault, out);
        else if (*calibrate) files = cmd_calibrate(cfg, out);
        else if (*mermin) files = cmd_mermin(cfg, out);
        else if (*sweep) files = cmd_sweep(cfg, out);
        else files = cmd_qpt(cfg, out);

        for (const auto& f : files) out << "wrote " << (fs::path(cfg.out_dir) / f).string() << "\n";
        const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
        out << "wall-clock: " << wall.count() << " s\n";
        return code;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace tmem
