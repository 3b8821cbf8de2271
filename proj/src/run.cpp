#include "nmopt/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <thread>

#include <json.hpp>

namespace nmopt {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

bool kernel_free(const RunConfig& cfg) {
    return cfg.markovian || cfg.bath.is_flat() || cfg.bath.eta == 0.0;
}

ClassicalTrajectory freeze_G(const ClassicalTrajectory& traj, const RunConfig& cfg) {
    // constant-G approximation: G pinned at g0 |alpha_ss| of the locked cavity
    ClassicalTrajectory out = traj;
    const cd lambda(cfg.system.kappa / 2.0, cfg.system.omega_m);
    const double g_const = cfg.system.g0 * std::abs(cfg.system.drive_E / lambda);
    std::fill(out.G.begin(), out.G.end(), cd(g_const, 0.0));
    return out;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream f(dir + "/" + name);
    if (!f) throw std::runtime_error("cannot open output file " + dir + "/" + name);
    return f;
}

void write_row(std::ofstream& f, const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) f << ',';
        f << format_g12(vals[i]);
    }
    f << '\n';
}

json config_json(const RunConfig& cfg) {
    json j;
    j["ini"] = to_ini(cfg);
    j["resolved"]["bath_modes"] = resolved_bath_modes(cfg);
    const auto band = resolved_oracle_band(cfg);
    j["resolved"]["oracle_band"] = {band.first, band.second};
    return j;
}

struct Manifest {
    json j;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit Manifest(const RunConfig& cfg, const std::string& command) {
        j["version"] = kVersion;
        j["command"] = command;
        j["config"] = config_json(cfg);
        j["warnings"] = json::array();
        j["events"] = json::array();
        for (const auto& [t, v] : cfg.schedule.kappa_steps)
            j["events"].push_back({{"type", "kappa_switch"}, {"t", t}, {"value", v}});
        for (const auto& [t, v] : cfg.schedule.drive_steps)
            j["events"].push_back({{"type", "drive_switch"}, {"t", t}, {"value", v}});
    }

    void finish(const std::string& dir) {
        j["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        auto f = open_out(dir, "manifest.json");
        f << j.dump(2) << '\n';
    }
};

void write_kernel_csvs(const RunConfig& cfg, const KernelPathResult& r,
                       const std::string& dir, Manifest& man) {
    const TimeGrid& grid = cfg.grid;
    {
        auto f = open_out(dir, "trajectory.csv");
        f << "t,re_alpha,im_alpha,re_beta,im_beta,delta_prime,abs_G\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            write_row(f, {grid.t(i), r.traj.alpha[i].real(), r.traj.alpha[i].imag(),
                          r.traj.beta[i].real(), r.traj.beta[i].imag(), r.traj.delta_eff[i],
                          std::abs(r.traj.G[i])});
    }
    {
        auto f = open_out(dir, "propagators.csv");
        f << "t,re_M,im_M,re_L,im_L,M2_minus_L2\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            write_row(f, {grid.t(i), r.pair.M[i].real(), r.pair.M[i].imag(),
                          r.pair.L[i].real(), r.pair.L[i].imag(),
                          std::norm(r.pair.M[i]) - std::norm(r.pair.L[i])});
    }
    {
        auto f = open_out(dir, "occupancy.csv");
        f << "t,N_b,homog,f1_part,f2_part,f3_part\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            write_row(f, {grid.t(i), r.occupancy.N_b[i], r.occupancy.homogeneous[i],
                          r.occupancy.f1_part[i], r.occupancy.f2_part[i],
                          r.occupancy.f3_part[i]});
    }
    double max_im = 0.0;
    for (double v : r.occupancy.im_residual) max_im = std::max(max_im, std::abs(v));
    man.j["tolerances"]["occupancy_im_residual_max"] = max_im;
    man.j["tolerances"]["channel_nodes"] = r.channel_nodes;
    man.j["tolerances"]["quad_nodes"] = r.quad_nodes;
}

void write_moments_csv(const RunConfig& cfg, const MomentsResult& r, const std::string& dir,
                       Manifest& man) {
    auto f = open_out(dir, "moments.csv");
    f << "t,N_a,N_b,v_a,v_b,v_c,v_kappa,dv\n";
    const auto& s = r.series;
    for (std::size_t i = 0; i < s.size(); ++i)
        write_row(f, {s.t[i], s.N_a[i].real(), s.N_b[i].real(), s.v_a[i], s.v_b[i], s.v_c[i],
                      s.v_kappa[i], s.dv[i]});
    const AuditResult audit = finite_difference_audit(r.series, cfg.grid);
    man.j["tolerances"]["moments_fd_residual_a"] = audit.max_residual_a;
    man.j["tolerances"]["moments_fd_residual_b"] = audit.max_residual_b;
}

int guarded(const RunConfig& cfg, const std::string& dir, const std::string& command,
            const std::function<int(Manifest&)>& body) {
    Manifest man(cfg, command);
    const Validated v = validate_config(cfg);
    for (const auto& w : v.warnings) {
        man.j["warnings"].push_back(w);
        std::cerr << "warning: " << w << '\n';
    }
    if (!v.ok()) {
        for (const auto& e : v.errors) std::cerr << "config error: " << e << '\n';
        man.j["error"] = v.errors;
        man.finish(dir);
        return 2;
    }
    try {
        const int rc = body(man);
        man.finish(dir);
        return rc;
    } catch (const DivergenceError& e) {
        std::cerr << "numerical divergence [" << e.guard() << "]: " << e.what() << '\n';
        man.j["error"] = {{"guard", e.guard()}, {"what", e.what()}};
        man.finish(dir);
        return 3;
    }
}

}  // namespace

KernelPathResult compute_kernel_path(const RunConfig& cfg) {
    KernelPathResult r;
    std::vector<cd> f_table;
    QuadratureRule channels;
    if (!kernel_free(cfg)) {
        const QuadratureRule quad = make_quadrature(cfg.bath, cfg.quad_nodes);
        f_table = tabulate_f(cfg.bath, quad, cfg.grid);
        channels = channel_rule(cfg.bath, cfg.grid.t_end(), cfg.channel_window);
        r.quad_nodes = quad.size();
        r.channel_nodes = channels.size();
    }

    ClassicalOptions copts;
    copts.drive_model = cfg.drive_model;
    copts.markovian = cfg.markovian;
    copts.gamma_m = cfg.system.gamma_m;
    auto [traj, phase] = evolve_classical(cfg.system, f_table, cfg.grid, cfg.schedule, copts);
    if (cfg.constant_G) traj = freeze_G(traj, cfg);

    const DressedKernel kernel = build_dressed_kernel(cfg.system, f_table, traj, phase,
                                                      cfg.markovian, cfg.rwa, false);
    PropagatorPair pair = solve_ML(kernel, cfg.grid);

    OccupancyOptions oopts;
    oopts.markovian = cfg.markovian;
    oopts.gamma_m = cfg.system.gamma_m;
    OccupancySeries occ =
        phonon_number(pair, traj, phase, cfg.bath, channels, cfg.system, cfg.grid, oopts);

    r.traj = std::move(traj);
    r.phase = std::move(phase);
    r.pair = std::move(pair);
    r.occupancy = std::move(occ);
    return r;
}

MomentsResult compute_moments_path(const RunConfig& cfg) {
    const std::size_t K = resolved_bath_modes(cfg);
    const bool coupled_bath =
        !(cfg.bath.kind == SpectralModel::Kind::OhmicFamily && cfg.bath.eta == 0.0);
    BathModes modes;  // left empty (K = 0) for an uncoupled bath
    if (K > 0 && coupled_bath)
        modes = discretize_bath(cfg.bath, std::max<std::size_t>(K, 2),
                                resolved_oracle_band(cfg));
    MomentOptions mopts;
    mopts.locked = cfg.drive_model == DriveModel::Locked;
    mopts.constant_G = cfg.constant_G;
    mopts.model = &cfg.bath;
    if (cfg.constant_G) {
        const cd lambda(cfg.system.kappa / 2.0, cfg.system.omega_m);
        mopts.G_const = cfg.system.g0 * std::abs(cfg.system.drive_E / lambda);
    }
    std::unique_ptr<ClassicalTrajectory> traj;
    if (!mopts.locked && !mopts.constant_G) {
        std::vector<cd> f_table;
        if (!kernel_free(cfg)) {
            const QuadratureRule quad = make_quadrature(cfg.bath, cfg.quad_nodes);
            f_table = tabulate_f(cfg.bath, quad, cfg.grid);
        }
        ClassicalOptions copts;
        copts.drive_model = cfg.drive_model;
        copts.markovian = cfg.markovian;
        copts.gamma_m = cfg.system.gamma_m;
        traj = std::make_unique<ClassicalTrajectory>(
            evolve_classical(cfg.system, f_table, cfg.grid, cfg.schedule, copts).first);
        mopts.traj = traj.get();
    }
    return evolve_moments(cfg.system, modes, cfg.grid, cfg.schedule, mopts);
}

CompareStats compare_series(const std::vector<double>& nb_kernel,
                            const std::vector<cd>& nb_moments, double tol_rel,
                            double tol_abs) {
    CompareStats st;
    for (std::size_t i = 0; i < nb_kernel.size() && i < nb_moments.size(); ++i) {
        const double ref = nb_moments[i].real();
        const double dev = std::abs(nb_kernel[i] - ref);
        st.max_abs_dev = std::max(st.max_abs_dev, dev);
        if (std::abs(ref) > 1e-300)
            st.max_rel_dev = std::max(st.max_rel_dev, dev / std::abs(ref));
        if (dev > std::max(tol_abs, tol_rel * std::abs(ref))) st.pass = false;
    }
    return st;
}

namespace {

int simulate_into(const RunConfig& cfg, const std::string& out_dir,
                  std::vector<double>* nb_out) {
    return guarded(cfg, out_dir, "simulate", [&](Manifest& man) {
        if (cfg.mode == RunMode::KernelPath || cfg.mode == RunMode::Both) {
            const KernelPathResult r = compute_kernel_path(cfg);
            write_kernel_csvs(cfg, r, out_dir, man);
            if (nb_out) *nb_out = r.occupancy.N_b;
        }
        if (cfg.mode == RunMode::MomentsOracle || cfg.mode == RunMode::Both) {
            const MomentsResult r = compute_moments_path(cfg);
            write_moments_csv(cfg, r, out_dir, man);
            if (nb_out && cfg.mode == RunMode::MomentsOracle) {
                nb_out->clear();
                for (const auto& v : r.series.N_b) nb_out->push_back(v.real());
            }
        }
        return 0;
    });
}

}  // namespace

int run_simulate(const RunConfig& cfg, const std::string& out_dir) {
    return simulate_into(cfg, out_dir, nullptr);
}

int run_kernel_export(const RunConfig& cfg, const std::string& out_dir) {
    return guarded(cfg, out_dir, "kernel", [&](Manifest& man) {
        if (cfg.bath.is_flat()) {
            std::cerr << "config error: flat bath has no memory kernel to export\n";
            man.j["error"] = "flat bath has no memory kernel";
            return 2;
        }
        const QuadratureRule quad = make_quadrature(cfg.bath, cfg.quad_nodes);
        const std::vector<cd> f = tabulate_f(cfg.bath, quad, cfg.grid);
        const std::vector<cd> c3 =
            tabulate_C3(cfg.bath, quad, cfg.system.temperature_ratio, cfg.grid);
        auto out = open_out(out_dir, "kernel.csv");
        out << "t,re_f,im_f,re_C3,im_C3\n";
        for (std::size_t i = 0; i < cfg.grid.size(); ++i)
            write_row(out, {cfg.grid.t(i), f[i].real(), f[i].imag(), c3[i].real(),
                            c3[i].imag()});
        man.j["tolerances"]["quad_nodes"] = quad.size();
        return 0;
    });
}

int run_compare(const RunConfig& cfg, const std::string& out_dir) {
    if (cfg.mode != RunMode::Both) {
        std::cerr << "config error: compare requires run.mode = both\n";
        return 2;
    }
    return guarded(cfg, out_dir, "compare", [&](Manifest& man) {
        const KernelPathResult kr = compute_kernel_path(cfg);
        const MomentsResult mr = compute_moments_path(cfg);
        write_kernel_csvs(cfg, kr, out_dir, man);
        write_moments_csv(cfg, mr, out_dir, man);

        const CompareStats st = compare_series(kr.occupancy.N_b, mr.series.N_b,
                                               cfg.compare_tol_rel, cfg.compare_tol_abs);
        {
            auto f = open_out(out_dir, "compare.csv");
            f << "t,N_b_kernel,N_b_moments,abs_dev\n";
            for (std::size_t i = 0; i < cfg.grid.size(); ++i)
                write_row(f, {cfg.grid.t(i), kr.occupancy.N_b[i], mr.series.N_b[i].real(),
                              std::abs(kr.occupancy.N_b[i] - mr.series.N_b[i].real())});
        }
        man.j["comparison"] = {{"max_abs_dev", st.max_abs_dev},
                               {"max_rel_dev", st.max_rel_dev},
                               {"tol_rel", cfg.compare_tol_rel},
                               {"tol_abs", cfg.compare_tol_abs},
                               {"pass", st.pass}};
        std::cout << "compare: max_abs_dev = " << format_g12(st.max_abs_dev)
                  << ", max_rel_dev = " << format_g12(st.max_rel_dev) << " -> "
                  << (st.pass ? "PASS" : "FAIL") << '\n';
        return st.pass ? 0 : 4;
    });
}

int run_sweep(const RunConfig& cfg, const std::string& axis,
              const std::vector<double>& values, const std::string& out_dir) {
    static const std::map<std::string, std::string> kAxisKeys = {
        {"drive_E", "system.drive_E"}, {"kappa", "system.kappa"}, {"s", "bath.s"},
        {"eta", "bath.eta"},           {"k", "bath.k"},
    };
    const auto it = kAxisKeys.find(axis);
    if (it == kAxisKeys.end()) {
        std::cerr << "config error: sweep axis must be one of drive_E, s, eta, k, kappa\n";
        return 2;
    }

    Manifest man(cfg, "sweep");
    man.j["sweep"] = {{"axis", axis}, {"values", values}};

    struct Entry {
        double value;
        double nb_final = std::nan("");
        double nb_min = std::nan("");
        std::string error;
    };
    std::vector<Entry> entries(values.size());

    auto one = [&](std::size_t i) {
        Entry e;
        e.value = values[i];
        RunConfig c = cfg;
        try {
            apply_override(c, it->second, format_g12(values[i]));
            const std::string sub = out_dir + "/" + axis + "_" + format_g12(values[i]);
            std::vector<double> nb;
            const int rc = simulate_into(c, sub, &nb);
            if (rc != 0 || nb.empty()) {
                e.error = "exit code " + std::to_string(rc);
                return e;
            }
            e.nb_final = nb.back();
            e.nb_min = *std::min_element(nb.begin(), nb.end());
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        return e;
    };

    // worker pool over the sweep values
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                       values.size()));
    std::vector<std::future<Entry>> futures;
    std::size_t next = 0;
    while (next < values.size() || !futures.empty()) {
        while (next < values.size() && futures.size() < workers) {
            futures.push_back(std::async(std::launch::async, one, next));
            ++next;
        }
        if (!futures.empty()) {
            const std::size_t idx = next - futures.size();
            entries[idx] = futures.front().get();
            futures.erase(futures.begin());
        }
    }

    auto f = open_out(out_dir, "summary.csv");
    f << axis << ",N_b_final,N_b_min\n";
    for (const auto& e : entries) {
        write_row(f, {e.value, e.nb_final, e.nb_min});
        if (!e.error.empty())
            man.j["events"].push_back(
                {{"type", "sweep_failure"}, {"value", e.value}, {"error", e.error}});
    }
    man.finish(out_dir);
    return 0;
}

}  // namespace nmopt
