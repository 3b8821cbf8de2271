// nmopt - open-system cooling dynamics of a linearized optomechanical
// resonator coupled to a structured non-Markovian phonon bath.
//
// Subcommands: simulate, kernel, compare, sweep. Exit codes: 0 success,
// 2 configuration error, 3 numerical divergence, 4 comparison tolerance
// exceeded.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmopt/run.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    double tolerance = -1.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--override", args.overrides,
                    "section.key=value override (repeatable)");
    cmd->add_option("--tolerance", args.tolerance,
                    "relative comparison tolerance (compare mode)");
}

int load(const CommonArgs& args, nmopt::RunConfig& cfg) {
    try {
        cfg = nmopt::load_config(args.config_path);
        for (const auto& ov : args.overrides) {
            const auto eq = ov.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("override must be section.key=value: " + ov);
            nmopt::apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
        }
        if (args.tolerance > 0.0) cfg.compare_tol_rel = args.tolerance;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-Markovian optomechanical cooling simulator"};
    app.require_subcommand(1);

    CommonArgs sim_args, ker_args, cmp_args, swp_args;
    std::string sweep_axis, sweep_values;

    CLI::App* sim = app.add_subcommand("simulate", "run the selected computation path(s)");
    add_common(sim, sim_args);
    CLI::App* ker = app.add_subcommand("kernel", "export f and C3 kernel tables as CSV");
    add_common(ker, ker_args);
    CLI::App* cmp = app.add_subcommand("compare", "run both paths and check their deviation");
    add_common(cmp, cmp_args);
    CLI::App* swp = app.add_subcommand("sweep", "run one simulation per axis value");
    add_common(swp, swp_args);
    swp->add_option("--axis", sweep_axis, "parameter: drive_E, s, eta, k, kappa")->required();
    swp->add_option("--values", sweep_values, "comma-separated values")->required();

    CLI11_PARSE(app, argc, argv);

    nmopt::RunConfig cfg;
    try {
        if (sim->parsed()) {
            if (const int rc = load(sim_args, cfg)) return rc;
            return nmopt::run_simulate(cfg, sim_args.out_dir);
        }
        if (ker->parsed()) {
            if (const int rc = load(ker_args, cfg)) return rc;
            return nmopt::run_kernel_export(cfg, ker_args.out_dir);
        }
        if (cmp->parsed()) {
            if (const int rc = load(cmp_args, cfg)) return rc;
            return nmopt::run_compare(cfg, cmp_args.out_dir);
        }
        if (swp->parsed()) {
            if (const int rc = load(swp_args, cfg)) return rc;
            return nmopt::run_sweep(cfg, sweep_axis, parse_values(sweep_values),
                                    swp_args.out_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
