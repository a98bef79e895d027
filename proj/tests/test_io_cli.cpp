#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tmem/cli.hpp"

using namespace tmem;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tmem_test_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "tmem");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("tmem_test_" + std::to_string(::getpid()) + "_" + name + ".ini");
    std::ofstream(p) << text;
    return p;
}

std::string without_wall_clock(const std::string& s) {
    std::istringstream is(s);
    std::string line, out;
    while (std::getline(is, line))
        if (line.rfind("wall-clock", 0) != 0) out += line + "\n";
    return out;
}

}  // namespace

TEST_CASE("shortest round-trip number format") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        const double v = u(rng) * std::pow(10.0, t % 20 - 10);
        CHECK(parse_double(format_double(v), "v") == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("config round-trips through its canonical form") {
    RunConfig c;
    c.seed = 18446744073709551615ULL;
    c.shots = Shots::of(8192);
    c.eta_grid = {0.0, 0.25, 1.0};
    c.corrections = {"raw", "gamma"};
    c.bypass_gst = true;
    c.weights.e0 = 0.5;
    c.channel = "H";
    const std::string text = serialize_config(c);
    CHECK(serialize_config(parse_config(text)) == text);
    const RunConfig back = parse_config(text);
    CHECK(back.seed == c.seed);
    CHECK(back.shots.count == 8192);
    CHECK(back.eta_grid == c.eta_grid);
    CHECK(back.corrections == c.corrections);
    CHECK(back.weights.e0 == 0.5);

    // comments, blank lines and partial files fall back to defaults
    const RunConfig partial = parse_config("# note\n[mermin]\norder = 3 ; inline\n\n");
    CHECK(partial.order == 3);
    CHECK(partial.replicas == 16);
    CHECK(serialize_config(parse_config(serialize_config(RunConfig{}))) == serialize_config(RunConfig{}));
}

TEST_CASE("config errors name the offending key") {
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("accepted");
    };
    CHECK(message("[noise]\nfoo = 1\n").find("noise.foo") != std::string::npos);
    CHECK(message("[other]\nn = 1\n").find("other") != std::string::npos);
    CHECK(message("[global]\nn = 2\nn = 3\n").find("duplicate") != std::string::npos);
    CHECK(message("[global]\nreplicas = 0\n").find("global.replicas") != std::string::npos);
    CHECK(message("[global]\nshots = many\n").find("global.shots") != std::string::npos);
    CHECK(message("[mermin]\norder = 5\n").find("mermin.order") != std::string::npos);
    CHECK(message("[mermin]\ncorrections = raw, L\n").find("mermin.corrections") != std::string::npos);
    CHECK(message("[noise]\nstate_depol = 1.5\n").find("noise.state_depol") != std::string::npos);
    CHECK(message("[qpt]\nchannel = nope\n").find("qpt.channel") != std::string::npos);
    CHECK(message("n = 1\n").find("outside") != std::string::npos);
}

TEST_CASE("matrix CSVs round-trip bit for bit and re-validate") {
    const fs::path dir = scratch("csv");
    fs::create_directories(dir);
    std::mt19937_64 rng(72);
    RMatrix m(4, 4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) m(i, j) = u(rng);
        m.col(j) /= m.col(j).sum();
    }
    const ColumnStochasticMatrix cs(m);
    write_matrix_csv(dir / "g.csv", stochastic_csv(cs, 2));
    const LabeledMatrix back = read_matrix_csv(dir / "g.csv");
    CHECK(back.col_labels == outcome_labels(2));
    CHECK(stochastic_from_csv(back).matrix() == m);
    CHECK(slurp(dir / "g.csv").rfind("prepared,00,01,10,11\n", 0) == 0);

    RMatrix bad = m;
    bad(0, 0) += 0.1;
    write_matrix_csv(dir / "bad.csv", {"prepared", outcome_labels(2), outcome_labels(2), bad.transpose()});
    CHECK_THROWS_AS(stochastic_from_csv(read_matrix_csv(dir / "bad.csv")), DomainError);
    fs::remove_all(dir);
}

TEST_CASE("calibrate on a noiseless model writes identity T and Gamma") {
    const fs::path dir = scratch("cal0");
    const fs::path cfg = write_config("cal0", "[noise]\nstate_depol = 0\ngate_depol = 0\npovm_noise_target = 0\n");
    const Run r = cli({"calibrate", "--config", cfg.string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    const RMatrix id = RMatrix::Identity(16, 16);
    CHECK((stochastic_from_csv(read_matrix_csv(dir / "T.csv")).matrix() - id).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((stochastic_from_csv(read_matrix_csv(dir / "gamma.csv")).matrix() - id).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(read_matrix_csv(dir / "calibration_table.csv").values.rows() == 256);
    CHECK(fs::exists(dir / "gateset_q3.txt"));
    fs::remove_all(dir);
}

TEST_CASE("calibrate for one qubit writes an L that re-validates") {
    const fs::path dir = scratch("cal1");
    const fs::path cfg = write_config("cal1", "[global]\nn = 1\n");
    REQUIRE(cli({"calibrate", "--config", cfg.string(), "--out", dir.string()}).code == 0);
    const LabeledMatrix L = read_matrix_csv(dir / "L_q0.csv");
    CHECK_NOTHROW(LMatrix(Eigen::Matrix4d(L.values)));
    CHECK(L.row_labels == std::vector<std::string>{"0", "1", "+", "+i"});
    const std::string gs = slurp(dir / "gateset_q0.txt");
    CHECK(gs.find("0.99") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("mermin with bypassed GST reports the exact value") {
    const fs::path dir = scratch("m4");
    const Run r = cli({"mermin", "--bypass-gst", "--replicas", "4", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const LabeledMatrix per = read_matrix_csv(dir / "per_replica.csv");
    CHECK(per.col_labels == std::vector<std::string>{"exact", "raw", "T", "gamma"});
    CHECK(per.values.rows() == 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(per.values(i, 3) - 0.8 * 8 * std::sqrt(2.0)) < 1e-8);
    CHECK(std::abs(per.values(0, 0) - 9.051) < 1e-3);
    const std::string report = slurp(dir / "mermin_report.json");
    CHECK(report.find("\"std_error\"") != std::string::npos);
    CHECK(report.find("wall") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("order-3 mermin on an ideal device gives 4 everywhere") {
    const fs::path dir = scratch("m3");
    const fs::path cfg = write_config(
        "m3", "[noise]\nstate_depol = 0\ngate_depol = 0\npovm_noise_target = 0\n[mermin]\norder = 3\neta = 0\n");
    REQUIRE(cli({"mermin", "--config", cfg.string(), "--replicas", "2", "--out", dir.string()}).code == 0);
    const LabeledMatrix per = read_matrix_csv(dir / "per_replica.csv");
    CHECK((per.values.array() - 4.0).abs().maxCoeff() < 1e-8);
    fs::remove_all(dir);
}

TEST_CASE("sweep writes an eleven-point, five-column curve file") {
    const fs::path dir = scratch("sweep");
    REQUIRE(cli({"sweep", "--replicas", "2", "--out", dir.string()}).code == 0);
    const std::string text = slurp(dir / "sweep_curves.csv");
    CHECK(text.rfind("eta,exact,raw,T,gamma\n", 0) == 0);
    const LabeledMatrix c = read_matrix_csv(dir / "sweep_curves.csv");
    CHECK(c.values.rows() == 11);
    CHECK(c.values.cols() + 1 == 5);
    const LabeledMatrix d = read_matrix_csv(dir / "sweep_absdiff.csv");
    CHECK(std::abs(d.values(2, 2) - std::abs(c.values(2, 3) - c.values(2, 0))) < 1e-15);
    fs::remove_all(dir);
}

TEST_CASE("corrections select the reported columns") {
    const fs::path dir = scratch("corr");
    const fs::path cfg = write_config("corr", "[mermin]\ncorrections = gamma\norder = 3\n");
    REQUIRE(cli({"mermin", "--config", cfg.string(), "--replicas", "2", "--out", dir.string()}).code == 0);
    CHECK(read_matrix_csv(dir / "per_replica.csv").col_labels == std::vector<std::string>{"exact", "gamma"});
    fs::remove_all(dir);
}

TEST_CASE("qpt reconstructs the configured channel") {
    const fs::path dir = scratch("qpt");
    REQUIRE(cli({"qpt", "--bypass-gst", "--out", dir.string()}).code == 0);
    const LabeledMatrix est = read_matrix_csv(dir / "ptm_est.csv");
    const Eigen::Vector4d d(1, 0.9, 0.9, 0.9);
    CHECK((est.values - RMatrix(d.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-8);
    REQUIRE(cli({"qpt", "--bypass-gst", "--channel", "identity", "--out", dir.string()}).code == 0);
    CHECK((read_matrix_csv(dir / "ptm_est.csv").values - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);
    REQUIRE(cli({"qpt", "--out", dir.string()}).code == 0);
    CHECK((read_matrix_csv(dir / "ptm_est.csv").values - RMatrix(d.asDiagonal())).cwiseAbs().maxCoeff() <= 2e-3);
    fs::remove_all(dir);
}

TEST_CASE("outputs are byte-identical across reruns") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    for (const char* cmd : {"calibrate", "mermin", "qpt"}) {
        REQUIRE(cli({cmd, "--replicas", "2", "--shots", "2000", "--seed", "77", "--out", a.string()}).code == 0);
        REQUIRE(cli({cmd, "--replicas", "2", "--shots", "2000", "--seed", "77", "--out", b.string()}).code == 0);
    }
    for (const auto& entry : fs::directory_iterator(a)) {
        const std::string name = entry.path().filename().string();
        std::string ta = slurp(entry.path()), tb = slurp(b / name);
        // the echoed out_dir is the only intended difference
        const auto strip = [](std::string s, const std::string& dir) {
            for (auto pos = s.find(dir); pos != std::string::npos; pos = s.find(dir)) s.erase(pos, dir.size());
            return s;
        };
        CAPTURE(name);
        CHECK(strip(ta, a.string()) == strip(tb, b.string()));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("exit codes") {
    const fs::path bad = write_config("bad", "[global]\nunknown_key = 3\n");
    const Run r = cli({"mermin", "--config", bad.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("global.unknown_key") != std::string::npos);
    CHECK(cli({"mermin", "--shots", "-1"}).code == 2);
    CHECK(cli({"mermin", "--replicas", "0"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"mermin", "--config", "/nonexistent/x.ini"}).code == 2);
    const fs::path dead = write_config("dead", "[global]\nn = 1\n[noise]\nstate_depol = 1\n");
    const Run dr = cli({"calibrate", "--config", dead.string(), "--out", scratch("dead").string()});
    CHECK(dr.code == 3);
    CHECK(!dr.err.empty());
    fs::remove_all(scratch("dead"));
}

TEST_CASE("selftest passes, detects an injected fault, and is deterministic") {
    const Run a = cli({"selftest"});
    CHECK(a.code == 0);
    CHECK(a.out.find("FAIL") == std::string::npos);
    const Run b = cli({"selftest"});
    CHECK(without_wall_clock(a.out) == without_wall_clock(b.out));
    const Run f = cli({"selftest", "--inject-fault"});
    CHECK(f.code == 1);
    CHECK(f.out.find("FAIL qpt.depolarizing_reconstruction") != std::string::npos);
}
