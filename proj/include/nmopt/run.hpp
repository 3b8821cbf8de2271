#pragma once

// Run orchestration: the two computation paths, deterministic CSV/JSON
// outputs, run manifests, compare and sweep drivers. Exit codes: 0 success,
// 2 configuration error, 3 numerical divergence, 4 comparison tolerance
// exceeded.

#include <string>
#include <vector>

#include "nmopt/config.hpp"
#include "nmopt/moments.hpp"
#include "nmopt/occupancy.hpp"
#include "nmopt/propagator.hpp"

namespace nmopt {

inline constexpr const char* kVersion = "0.1.0";

struct KernelPathResult {
    ClassicalTrajectory traj;
    PhaseIntegral phase;
    PropagatorPair pair;
    OccupancySeries occupancy;
    std::size_t channel_nodes = 0;
    std::size_t quad_nodes = 0;
};

/// Memory-kernel propagator path: classical trajectories, Volterra solve,
/// phonon-number assembly.
KernelPathResult compute_kernel_path(const RunConfig& cfg);

/// Discretized-bath second-moment path.
MomentsResult compute_moments_path(const RunConfig& cfg);

struct CompareStats {
    double max_abs_dev = 0.0;
    double max_rel_dev = 0.0;
    bool pass = true;
};

CompareStats compare_series(const std::vector<double>& nb_kernel,
                            const std::vector<cd>& nb_moments, double tol_rel,
                            double tol_abs);

/// simulate: write time-series CSVs for the selected path(s) plus the
/// manifest. Returns the process exit code.
int run_simulate(const RunConfig& cfg, const std::string& out_dir);

/// kernel: export f and C3 tables as CSV.
int run_kernel_export(const RunConfig& cfg, const std::string& out_dir);

/// compare: run both paths on one grid and check the deviation against the
/// configured tolerance.
int run_compare(const RunConfig& cfg, const std::string& out_dir);

/// sweep: one run per value of `axis` in a worker pool plus a summary CSV.
int run_sweep(const RunConfig& cfg, const std::string& axis,
              const std::vector<double>& values, const std::string& out_dir);

}  // namespace nmopt
