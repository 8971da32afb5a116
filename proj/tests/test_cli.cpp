// End-to-end checks of the command-line front-end: these spawn the built
// binary and inspect its exit codes and artifacts.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fch/config.hpp"
#include "fch/fractional.hpp"
#include "fch/history.hpp"

namespace fs = std::filesystem;
using namespace fch;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("fch_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const std::string& out_dir = "") {
    std::string cmd;
    if (!out_dir.empty()) cmd += "FRACHEM_OUT=" + out_dir + " ";
    cmd += std::string(FCH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string small_run_config(const fs::path& out_dir) {
    std::ostringstream oss;
    oss << "[mesh]\na = 0.0\nb = 2.0\nn_cells = 16\n"
        << "[solver]\nalpha = 0.1\ndt = 1e-3\nt_end = 0.05\n"
        << "[initial]\nkind = constant_noise\nmean = 0.0\namplitude = 0.05\nseed = 42\n"
        << "[output]\ndir = " << out_dir.string() << "\n";
    return oss.str();
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream os(p);
    os << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

}  // namespace

TEST_CASE("run produces csv and summary artifacts") {
    TempDir tmp("run");
    const fs::path out = tmp.path / "out";
    const fs::path cfg = write_file(tmp.path, "run.cfg", small_run_config(out));

    CHECK(run_cli("run " + cfg.string()) == 0);
    REQUIRE(fs::exists(out / "trajectory.csv"));
    REQUIRE(fs::exists(out / "summary.txt"));

    std::ifstream csv(out / "trajectory.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,energy,mass,u_dot_norm_sq,history_norm_sq,energy_identity_residual");

    // energy column is non-increasing beyond the per-step tolerance
    std::vector<double> energies;
    std::string line;
    while (std::getline(csv, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        energies.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    REQUIRE(energies.size() == 51);
    for (std::size_t i = 1; i < energies.size(); ++i) {
        CHECK(energies[i] <= energies[i - 1] + 1e-9);
    }
    CHECK(slurp(out / "summary.txt").find("stability_flag = 0") != std::string::npos);
}

TEST_CASE("identical configs give bitwise-identical outputs") {
    TempDir tmp("det");
    const fs::path cfg = write_file(tmp.path, "run.cfg", small_run_config(tmp.path / "ignored"));
    const fs::path out1 = tmp.path / "o1";
    const fs::path out2 = tmp.path / "o2";
    CHECK(run_cli("run " + cfg.string(), out1.string()) == 0);
    CHECK(run_cli("run " + cfg.string(), out2.string()) == 0);
    CHECK(slurp(out1 / "trajectory.csv") == slurp(out2 / "trajectory.csv"));
    CHECK(!slurp(out1 / "trajectory.csv").empty());
}

TEST_CASE("config errors exit with status 2") {
    TempDir tmp("err");
    const fs::path bad_beta = write_file(
        tmp.path, "beta.cfg", "[mesh]\nn_cells = 16\n[operator]\nbeta = 0.2\n");
    CHECK(run_cli("run " + bad_beta.string()) == 2);
    CHECK(run_cli("validate " + bad_beta.string()) == 2);

    const fs::path bad_alpha =
        write_file(tmp.path, "alpha.cfg", "[mesh]\nn_cells = 16\n[solver]\nalpha = 0.0\n");
    CHECK(run_cli("run " + bad_alpha.string()) == 2);

    CHECK(run_cli("run no_such.cfg") == 2);
    CHECK(run_cli("bogus-verb") == 2);

    // grid-mode step misaligned with the s-grid spacing
    std::ostringstream mis;
    mis << "[mesh]\nn_cells = 16\nb = 2.0\n"
        << "[history]\nmode = grid\ns_max = 30.0\nn_s = 1000\n"
        << "[solver]\nalpha = 0.1\ndt = 1e-3\nt_end = 0.01\n";
    const fs::path misaligned = write_file(tmp.path, "mis.cfg", mis.str());
    CHECK(run_cli("run " + misaligned.string()) == 2);
}

TEST_CASE("a mass-violating initial history exits with status 4") {
    TempDir tmp("hist");
    // craft a grid-history checkpoint whose rows carry a nonzero spatial mean
    const KernelSpec kernel = make_exponential_kernel({{1.0, 1.0}});
    const SGrid grid = build_s_grid(kernel, 30.0, 30000, 1e-8);  // ds = 1e-3
    HistoryGrid h = make_zero_history_grid(grid, 17);
    h.values.row(3).setConstant(0.5);
    const fs::path hist = tmp.path / "bad_history.txt";
    {
        std::ofstream os(hist);
        save_history_grid(os, h);
    }
    std::ostringstream cfg;
    cfg << "[mesh]\na = 0.0\nb = 2.0\nn_cells = 16\n"
        << "[history]\nmode = grid\ns_max = 30.0\nn_s = 30000\n"
        << "[solver]\nalpha = 0.1\ndt = 1e-3\nt_end = 0.005\n"
        << "[initial]\nkind = constant_noise\nhistory_file = " << hist.string() << "\n"
        << "[output]\ndir = " << (tmp.path / "out").string() << "\n";
    const fs::path path = write_file(tmp.path, "bad.cfg", cfg.str());
    CHECK(run_cli("run " + path.string()) == 4);
}

TEST_CASE("dump-operators writes readable coordinate matrices") {
    TempDir tmp("dump");
    const fs::path out = tmp.path / "ops";
    const fs::path cfg = write_file(tmp.path, "dump.cfg", small_run_config(out));
    CHECK(run_cli("dump-operators " + cfg.string()) == 0);
    for (const char* name :
         {"S_restricted.txt", "S_regional.txt", "V_weights.txt", "mass_matrix.txt"}) {
        CHECK(fs::exists(out / name));
    }
    std::ifstream sres(out / "S_restricted.txt"), sreg(out / "S_regional.txt"),
        vw(out / "V_weights.txt");
    const Mat S = read_matrix_coordinate(sres);
    const Mat R = read_matrix_coordinate(sreg);
    const Mat V = read_matrix_coordinate(vw);
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-12 * S.cwiseAbs().maxCoeff());
    CHECK((S - R - V).cwiseAbs().maxCoeff() < 1e-8 * S.cwiseAbs().maxCoeff());
}

TEST_CASE("validate accepts the sample configuration") {
    TempDir tmp("val");
    const fs::path cfg = write_file(tmp.path, "ok.cfg", small_run_config(tmp.path / "out"));
    CHECK(run_cli("validate " + cfg.string()) == 0);
}

TEST_CASE("suite verb runs the operator bundle") {
    TempDir tmp("suite");
    const fs::path out = tmp.path / "out";
    const fs::path cfg = write_file(tmp.path, "s.cfg", small_run_config(out));
    CHECK(run_cli("suite operators " + cfg.string()) == 0);
    const std::string report = slurp(out / "suite_operators.txt");
    CHECK(report.find("[PASS] criterion 4") != std::string::npos);
    CHECK(report.find("[PASS] criterion 5") != std::string::npos);
    CHECK(run_cli("suite bogus " + cfg.string()) == 2);
}
