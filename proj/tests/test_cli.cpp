#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

// End-to-end checks of the command-line front end: exit codes are a stable
// contract (0 pass, 1 checks failed, 2 usage/config error).

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    std::string cmd = std::string(HYSTAB_BIN) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path write_tmp(const std::string& name, const std::string& content) {
    fs::path dir = fs::temp_directory_path() / "hystab_cli_test";
    fs::create_directories(dir);
    fs::path p = dir / name;
    std::ofstream os(p);
    os << content;
    return p;
}

}  // namespace

TEST_CASE("classify exit codes") {
    auto ccw = write_tmp("ccw.json", R"({
        "operator": {"model": "coleman_hodgdon", "c_alpha": 0.01, "a": 0.0025, "b": 0.005},
        "assert_class": "ccw"
    })");
    CHECK(run("classify --config " + ccw.string()) == 0);

    auto cw = write_tmp("cw.json", R"({
        "operator": {"model": "dahl", "f_c": 0.75, "rho": 1.5},
        "assert_class": "cw"
    })");
    CHECK(run("classify --config " + cw.string()) == 0);

    auto wrong = write_tmp("wrong.json", R"({
        "operator": {"model": "dahl", "f_c": 0.75, "rho": 1.5},
        "assert_class": "ccw"
    })");
    CHECK(run("classify --config " + wrong.string()) == 1);

    auto degenerate = write_tmp("deg.json", R"({
        "operator": {"model": "affine", "f1": [0, 0, 1], "f2": [0, 0, 1],
                     "rect": {"gamma": [-1, 1], "v": [-1, 1]}},
        "assert_class": "ccw"
    })");
    CHECK(run("classify --config " + degenerate.string()) == 2);

    auto malformed = write_tmp("bad.json", R"({"operator": {"model": "dahl"}, "junk": 1})");
    CHECK(run("classify --config " + malformed.string()) == 2);
    CHECK(run("classify --config /nonexistent.json") == 2);
}

TEST_CASE("certify exit codes") {
    auto good = write_tmp("cert_good.json", R"({
        "system": {"A": [[-3]], "B": [1], "C": [-2], "D": 1},
        "interconnection": {"sign": -1, "case": "b"},
        "certificate": {"P": [[1, -2], [-2, 6]], "L": [1, -3], "delta": 2.0}
    })");
    CHECK(run("certify --config " + good.string()) == 0);

    auto bad = write_tmp("cert_bad.json", R"({
        "system": {"A": [[-3]], "B": [1], "C": [-2], "D": 1},
        "interconnection": {"sign": -1, "case": "b"},
        "certificate": {"P": [[1, -2], [-2, 1]], "L": [1, -3], "delta": 2.0}
    })");
    CHECK(run("certify --config " + bad.string()) == 1);
}

TEST_CASE("simulate exit codes and artifacts") {
    auto cfg = write_tmp("sim.json", R"({
        "operator": {"model": "dahl", "f_c": 0.75, "rho": 1.5},
        "system": {"A": [[-1]], "B": [1], "C": [1], "D": 0},
        "interconnection": {"sign": -1, "case": "c"},
        "certificate": {"Q": [[1]]},
        "run": {"x0": [1.0], "T": 50.0, "dt": 0.001}
    })");
    fs::path out = fs::temp_directory_path() / "hystab_cli_test" / "sim_out";
    CHECK(run("simulate --config " + cfg.string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "trajectory.csv"));
    CHECK(fs::exists(out / "manifest.json"));

    auto bad_dt = write_tmp("sim_bad.json", R"({
        "operator": {"model": "dahl", "f_c": 0.75, "rho": 1.5},
        "system": {"A": [[-1]], "B": [1], "C": [1], "D": 0},
        "interconnection": {"sign": -1, "case": "c"},
        "run": {"x0": [1.0], "T": 50.0, "dt": 0.0}
    })");
    CHECK(run("simulate --config " + bad_dt.string()) == 2);
}

TEST_CASE("reproduce exit codes") {
    fs::path out = fs::temp_directory_path() / "hystab_cli_test" / "rep_out";
    CHECK(run("reproduce ex_case_b --out " + out.string()) == 0);
    CHECK(fs::exists(out / "ex_case_b" / "config.json"));
    CHECK(fs::exists(out / "ex_case_b" / "trajectory.csv"));
    CHECK(fs::exists(out / "ex_case_b" / "manifest.json"));
    CHECK(run("reproduce no_such_id") == 2);
}

TEST_CASE("storage-grid writes the requested CSV") {
    auto cfg = write_tmp("grid.json", R"({
        "operator": {"model": "dahl", "f_c": 0.75, "rho": 1.5},
        "storage_grid": {"gamma": [-0.5, 0.5, 6], "v": [-1, 1, 6], "route": "closed"}
    })");
    fs::path out = fs::temp_directory_path() / "hystab_cli_test" / "grid.csv";
    CHECK(run("storage-grid --config " + cfg.string() + " --out " + out.string()) == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "gamma,v,H,branch,intersect");
}

TEST_CASE("design subcommand finds the reference controller") {
    auto cfg = write_tmp("design.json", R"({
        "design": {
            "plant": {"A": [[0, 1], [-1, -2]], "B": [0, 1], "C": [1, 0], "D": 1},
            "topology": "actuator",
            "hysteresis": {"type": "ccw",
                           "fan_samples": [[-1, -0.475], [0, 0], [1, 0.475]]},
            "candidates": [
                {"A": [[0, 1], [-2, -4]], "B": [0, 1], "C": [-1.5, -2], "D": 1}
            ],
            "target_L": [0, 0, 0.25, 0, 0],
            "seed": 5
        }
    })");
    CHECK(run("design --config " + cfg.string()) == 0);
}
