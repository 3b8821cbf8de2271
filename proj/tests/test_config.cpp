#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nmopt/run.hpp"

using namespace nmopt;

TEST_SUITE_BEGIN("config");

namespace {

const char* kSample = R"(# fig2-style configuration
[system]
kappa = 0.05
g0 = 5e-5
drive_E = 300
m0 = 100
n0 = 0
temperature_ratio = 9.95033085316e-3
alpha0_abs = 100
beta0_abs = 100
gamma_m = 1e-8
thermal_equilibrium = true

[bath]
model = ohmic
eta = 1e-5
s = 0.5
omega0 = 5

[grid]
dt = 0.02
n_steps = 400

[run]
mode = kernel
drive_model = locked
)";

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("parse and defaults") {
    const RunConfig cfg = parse_config(kSample);
    CHECK(cfg.system.kappa == 0.05);
    CHECK(cfg.system.g0 == 5e-5);
    CHECK(cfg.bath.s == 0.5);
    CHECK(cfg.grid.n_steps == 400);
    CHECK(cfg.mode == RunMode::KernelPath);
    CHECK(cfg.thermal_equilibrium);
    CHECK(validate_config(cfg).ok());
    CHECK(resolved_bath_modes(cfg) == 600);
    const auto band = resolved_oracle_band(cfg);
    CHECK(band.first == 0.0);
    CHECK(band.second == 4.0);
}

TEST_CASE("unknown keys and malformed input are rejected") {
    CHECK_THROWS(parse_config("[system]\nbogus = 1\n"));
    CHECK_THROWS(parse_config("[nosuch]\nkappa = 1\n"));
    CHECK_THROWS(parse_config("kappa = 1\n"));
    CHECK_THROWS(parse_config("[system]\nkappa = abc\n"));
    CHECK_THROWS(parse_config("[run]\nmode = sideways\n"));
}

TEST_CASE("schedule strings") {
    RunConfig cfg = parse_config(kSample);
    apply_override(cfg, "schedule.kappa_steps", "133.6:10; 150:0.05");
    REQUIRE(cfg.schedule.kappa_steps.size() == 2);
    CHECK(cfg.schedule.kappa_steps[0].first == 133.6);
    CHECK(cfg.schedule.kappa_steps[0].second == 10.0);
    CHECK(cfg.schedule.kappa_steps[1].first == 150.0);
}

TEST_CASE("overrides use dotted keys") {
    RunConfig cfg = parse_config(kSample);
    apply_override(cfg, "system.kappa", "0.1");
    apply_override(cfg, "bath.s", "2");
    apply_override(cfg, "run.mode", "both");
    CHECK(cfg.system.kappa == 0.1);
    CHECK(cfg.bath.s == 2.0);
    CHECK(cfg.mode == RunMode::Both);
    CHECK_THROWS(apply_override(cfg, "nodots", "1"));
}

TEST_CASE("round-trip reproduces every field bit-exactly") {
    RunConfig cfg = parse_config(kSample);
    cfg.schedule.kappa_steps = {{133.6, 10.0}};
    cfg.bath.k = -2.30;
    cfg.system.temperature_ratio = 9.95033085316e-3;  // 12 significant digits
    const RunConfig back = parse_config(to_ini(cfg));
    CHECK(back.system.kappa == cfg.system.kappa);
    CHECK(back.system.temperature_ratio == cfg.system.temperature_ratio);
    CHECK(back.system.alpha0 == cfg.system.alpha0);
    CHECK(back.bath.k == cfg.bath.k);
    CHECK(back.grid.dt == cfg.grid.dt);
    CHECK(back.schedule.kappa_steps == cfg.schedule.kappa_steps);
    // and the serialized form is a fixed point
    CHECK(to_ini(back) == to_ini(cfg));
}

TEST_CASE("config validation catches mode/bath mismatches") {
    RunConfig cfg = parse_config(kSample);
    cfg.markovian = true;  // flat bath required
    CHECK_FALSE(validate_config(cfg).ok());
    cfg.markovian = false;
    cfg.bath.kind = SpectralModel::Kind::Flat;
    CHECK_FALSE(validate_config(cfg).ok());
    cfg.markovian = true;
    CHECK(validate_config(cfg).ok());
}

TEST_CASE("simulate writes complete deterministic outputs") {
    RunConfig cfg = parse_config(kSample);
    cfg.grid.n_steps = 50;
    const auto dir1 = temp_dir("nmopt_det1");
    const auto dir2 = temp_dir("nmopt_det2");
    REQUIRE(run_simulate(cfg, dir1) == 0);
    REQUIRE(run_simulate(cfg, dir2) == 0);

    for (const char* name : {"occupancy.csv", "propagators.csv", "trajectory.csv"}) {
        const std::string a = slurp(dir1 + std::string("/") + name);
        const std::string b = slurp(dir2 + std::string("/") + name);
        REQUIRE_FALSE(a.empty());
        CHECK(a == b);  // byte-identical across runs
        // header + n_steps + 1 rows
        CHECK(std::count(a.begin(), a.end(), '\n') == 52);
    }

    // first occupancy row is t = 0 with N_b = m0
    std::ifstream occ(dir1 + "/occupancy.csv");
    std::string header, first;
    std::getline(occ, header);
    std::getline(occ, first);
    CHECK(first.substr(0, 6) == "0,100,");
}

TEST_CASE("exit codes") {
    RunConfig cfg = parse_config(kSample);

    SUBCASE("config error gives 2") {
        cfg.grid.dt = 0.0;
        CHECK(run_simulate(cfg, temp_dir("nmopt_exit2")) == 2);
    }
    SUBCASE("divergence gives 3") {
        cfg.system.drive_E = 1e12;
        cfg.drive_model = DriveModel::SelfConsistent;
        cfg.thermal_equilibrium = false;
        cfg.grid.n_steps = 4000;
        CHECK(run_simulate(cfg, temp_dir("nmopt_exit3")) == 3);
    }
    SUBCASE("compare tolerance exceeded gives 4") {
        cfg.mode = RunMode::Both;
        cfg.grid.n_steps = 200;
        cfg.bath_modes = 40;  // deliberately coarse oracle
        cfg.compare_tol_rel = 1e-15;
        cfg.compare_tol_abs = 1e-15;
        CHECK(run_compare(cfg, temp_dir("nmopt_exit4")) == 4);
    }
    SUBCASE("compare requires mode = both") {
        CHECK(run_compare(cfg, temp_dir("nmopt_exit_mode")) == 2);
    }
}

TEST_CASE("degenerate compare: both paths frozen at m0") {
    RunConfig cfg = parse_config(kSample);
    cfg.bath.eta = 0.0;
    cfg.system.g0 = 0.0;
    cfg.system.drive_E = 0.0;
    cfg.mode = RunMode::Both;
    cfg.grid.n_steps = 500;
    cfg.bath_modes = 16;
    const KernelPathResult kr = compute_kernel_path(cfg);
    const MomentsResult mr = compute_moments_path(cfg);
    const CompareStats st = compare_series(kr.occupancy.N_b, mr.series.N_b, 1e-12, 1e-12);
    CHECK(st.max_abs_dev < 1e-12);
    CHECK(st.pass);
}

TEST_CASE("sweep: summary ordering and empty value list") {
    RunConfig cfg = parse_config(kSample);
    cfg.grid.n_steps = 100;
    cfg.bath_modes = 8;

    SUBCASE("empty list exits 0 with an empty summary") {
        const auto dir = temp_dir("nmopt_sweep_empty");
        CHECK(run_sweep(cfg, "drive_E", {}, dir) == 0);
        const std::string s = slurp(dir + "/summary.csv");
        CHECK(std::count(s.begin(), s.end(), '\n') == 1);  // header only
    }
    SUBCASE("unknown axis exits 2") {
        CHECK(run_sweep(cfg, "nonsense", {1.0}, temp_dir("nmopt_sweep_bad")) == 2);
    }
    SUBCASE("two values produce ordered rows and per-value outputs") {
        const auto dir = temp_dir("nmopt_sweep2");
        CHECK(run_sweep(cfg, "drive_E", {30.0, 300.0}, dir) == 0);
        const std::string s = slurp(dir + "/summary.csv");
        CHECK(std::count(s.begin(), s.end(), '\n') == 3);
        CHECK(s.find("drive_E,N_b_final,N_b_min") == 0);
        CHECK(s.find("\n30,") != std::string::npos);
        CHECK(std::filesystem::exists(dir + "/drive_E_30/occupancy.csv"));
        CHECK(std::filesystem::exists(dir + "/drive_E_300/occupancy.csv"));
    }
}

TEST_CASE("kernel export has the documented columns") {
    RunConfig cfg = parse_config(kSample);
    cfg.grid.n_steps = 20;
    const auto dir = temp_dir("nmopt_kernel");
    REQUIRE(run_kernel_export(cfg, dir) == 0);
    std::ifstream f(dir + "/kernel.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "t,re_f,im_f,re_C3,im_C3");

    // a flat bath has no memory kernel to export
    cfg.bath.kind = SpectralModel::Kind::Flat;
    cfg.markovian = true;
    CHECK(run_kernel_export(cfg, temp_dir("nmopt_kernel_flat")) == 2);
}

TEST_SUITE_END();
