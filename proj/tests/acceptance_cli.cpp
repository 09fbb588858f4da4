#include "acceptance_util.hpp"

#include "dsos/csv.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file ", path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = acceptance::cli_path() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("criterion 10: byte-identical artifacts under a fixed seed") {
    REQUIRE_MESSAGE(!acceptance::cli_path().empty(), "pass --cli-path=<dsos binary>");
    const fs::path dir = fs::temp_directory_path() / "dsos_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir / "b1");
    fs::create_directories(dir / "b2");
    const std::string d = dir.string();

    bool all_ok = true;
    std::ostringstream detail;

    // simulate: twice, byte-compare, check arity
    const std::string sim_args = "simulate --shift label --intensity 2 --n 400 --d 4 --seed 7";
    all_ok &= run_cli(sim_args + " --out " + d + "/sim1.csv") == 0;
    all_ok &= run_cli(sim_args + " --out " + d + "/sim2.csv") == 0;
    const std::string sim1 = slurp(dir / "sim1.csv");
    const bool sim_identical = sim1 == slurp(dir / "sim2.csv");
    const auto sim_table = dsos::parse_csv(sim1);
    const bool sim_shape = sim_table.rows.size() == 800 && sim_table.header.size() == 5;
    detail << "simulate identical=" << sim_identical << " shape=" << sim_shape;
    all_ok &= sim_identical && sim_shape;

    // test: null data accepts (exit 0), twice byte-identical
    const std::string test_args = "test --data " + d + "/sim1.csv --origin-column origin " +
                                  "--scorer anomaly --method at --trees 128 --seed 3 --alpha 0.01";
    const int rc1 = run_cli(test_args + " --out " + d + "/r1.json");
    const int rc2 = run_cli(test_args + " --out " + d + "/r2.json");
    const bool test_identical = slurp(dir / "r1.json") == slurp(dir / "r2.json");
    detail << "; test rc=" << rc1 << "," << rc2 << " identical=" << test_identical;
    all_ok &= test_identical && rc1 == rc2;

    // exit-code contract: a gross shift rejects with 3, alpha 0 never does
    all_ok &= run_cli("simulate --shift mean --intensity 2 --n 400 --d 4 --seed 9 --out " + d +
                      "/shifted.csv") == 0;
    const std::string shifted_args = "test --data " + d + "/shifted.csv --origin-column origin "
                                     "--scorer two-sample --method ss --trees 128 --seed 5";
    const int rc_shift = run_cli(shifted_args + " --alpha 0.05 --out " + d + "/r3.json");
    const int rc_zero = run_cli(shifted_args + " --alpha 0 --out " + d + "/r4.json");
    detail << "; shifted rc=" << rc_shift << " (want 3), alpha0 rc=" << rc_zero << " (want 0)";
    all_ok &= rc_shift == 3 && rc_zero == 0;

    // usage error path
    const int rc_bad = run_cli("test --data " + d + "/sim1.csv --origin-column origin "
                               "--scorer residual --method at");
    detail << "; residual-without-label rc=" << rc_bad << " (want 1)";
    all_ok &= rc_bad == 1;

    // panel on the bundled iris with a preset, plus plot data
    const std::string iris_csv = std::string(DSOS_DATA_DIR) + "/iris.csv";
    const std::string panel_args = "panel --data " + iris_csv +
                                   " --label species --preset out-of-distribution --method at "
                                   "--trees 128 --seed 11";
    all_ok &= run_cli(panel_args + " --out " + d + "/p1.json --plot-data " + d + "/p1.csv") == 0;
    all_ok &= run_cli(panel_args + " --out " + d + "/p2.json --plot-data " + d + "/p2.csv") == 0;
    const bool panel_identical = slurp(dir / "p1.json") == slurp(dir / "p2.json") &&
                                 slurp(dir / "p1.csv") == slurp(dir / "p2.csv");
    const auto plot = dsos::parse_csv(slurp(dir / "p1.csv"));
    const bool plot_shape = plot.rows.size() == 4 && plot.header.size() == 5;
    detail << "; panel identical=" << panel_identical << " plot rows=" << plot.rows.size();
    all_ok &= panel_identical && plot_shape;

    // report pretty-printer reads its own artifact
    all_ok &= run_cli("report " + d + "/p1.json") == 0;

    // bench: small grid twice into separate directories
    const std::string bench_args =
        "bench --shifts none --n 400 --d 4 --methods SS,CTST --replicates 20 --trees 32 "
        "--notion anomaly --mc-draws 2000 --seed 13 --out-dir ";
    all_ok &= run_cli(bench_args + d + "/b1") == 0;
    all_ok &= run_cli(bench_args + d + "/b2") == 0;
    const bool bench_identical =
        slurp(dir / "b1/records.csv") == slurp(dir / "b2/records.csv") &&
        slurp(dir / "b1/summary.json") == slurp(dir / "b2/summary.json");
    detail << "; bench identical=" << bench_identical;
    all_ok &= bench_identical;

    acceptance::report(10, all_ok, detail.str());
}
