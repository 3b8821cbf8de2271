#pragma once

// Classical mean-field trajectories alpha(t), beta(t), the effective detuning
// Delta'(t), the linear coupling G(t) = g0*alpha(t) and the cavity phase
// integral U(t) = int_0^t [i Delta'(tau) + kappa(tau)/2] dtau, in terms of
// which u(t1 - t2) = -[U(t1) - U(t2)].

#include <vector>

#include "nmopt/model.hpp"
#include "nmopt/spectral.hpp"

namespace nmopt {

struct ClassicalTrajectory {
    std::vector<cd> alpha;
    std::vector<cd> beta;
    std::vector<double> delta_eff;  ///< Delta'(t) actually used downstream
    std::vector<cd> G;              ///< g0 * alpha(t)
};

struct PhaseIntegral {
    std::vector<cd> U;  ///< U(0) = 0; Re U nondecreasing
};

enum class DriveModel {
    Locked,          ///< Delta' held at omega_m (sideband cooling condition)
    SelfConsistent,  ///< Delta'(t) = delta_c - g0 [beta + beta*] from the dynamics
};

struct ClassicalOptions {
    DriveModel drive_model = DriveModel::Locked;
    bool markovian = false;  ///< replace the beta memory term with local damping
    double gamma_m = 0.0;
};

/// Exact phase integral for the locked mode: U(t) = i*omega_m*t + (1/2) int kappa.
PhaseIntegral sideband_lock(const SystemParams& params, const TimeGrid& grid,
                            const Schedule& sched = {});

/// Integrate the mean-field equations. `f_table` is the memory kernel f on the
/// grid (may be empty for a kernel-free bath, e.g. eta = 0 or Markovian mode).
/// The cavity amplitude is propagated with its exact per-segment integrating
/// factor, the mechanical amplitude with a trapezoidal-history predictor-
/// corrector in the co-rotating frame; both are second-order overall.
std::pair<ClassicalTrajectory, PhaseIntegral> evolve_classical(
    const SystemParams& params, const std::vector<cd>& f_table, const TimeGrid& grid,
    const Schedule& sched, const ClassicalOptions& opts = {});

}  // namespace nmopt
