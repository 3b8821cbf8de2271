#pragma once

// Independent oracle: the full second-moment system over a discretized bath
// (6 complex scalars + 5 per-mode complex blocks), integrated with classic
// fixed-step RK4, plus the energy-transport diagnostics
//
//   v_a = -v_kappa + v_c,   v_b = -v_c + dv,
//
// with v_kappa = kappa N_a, v_c the optomechanical exchange rate, and dv the
// bath exchange rate. An auxiliary per-mode channel tracks the pure heat-
// conduction contribution to dv (the part driven by N_k - N_b alone).

#include <vector>

#include "nmopt/classical.hpp"
#include "nmopt/model.hpp"
#include "nmopt/spectral.hpp"

namespace nmopt {

struct MomentState {
    double t = 0.0;
    cd N_a, N_b, adb, ab, a2, b2;  ///< <a'a>, <b'b>, <a'b>, <ab>, <a^2>, <b^2>
    std::vector<cd> adbk, abk, bdbk, bbk, bk2;  ///< per-mode cross moments
    std::vector<cd> hc;            ///< heat-conduction audit channels
    std::vector<double> N_k;       ///< fixed thermal occupations
    cd G;                          ///< coupling in effect at t
    double kappa = 0.0;
};

struct TransportRates {
    double v_a, v_b, v_c, v_kappa, dv;
    double dv_heat;  ///< (N_k - N_b)-driven part of dv
};

struct MomentSeries {
    std::vector<double> t;
    std::vector<cd> N_a, N_b, adb, ab, a2, b2;
    std::vector<double> v_a, v_b, v_c, v_kappa, dv, dv_heat;

    std::size_t size() const { return t.size(); }
};

struct MomentOptions {
    bool locked = true;            ///< Delta' = omega_m; alpha integrated in-state
    bool constant_G = false;
    cd G_const = 0.0;
    const ClassicalTrajectory* traj = nullptr;   ///< required when !locked
    const SpectralModel* model = nullptr;        ///< sets the N_k occupation policy
};

struct MomentsResult {
    MomentSeries series;
    MomentState final_state;
};

/// Integrate the moment system on the grid. Initial state: N_b = m0,
/// N_a = n0, all cross moments and squeezing moments zero, bath held thermal.
/// K = 0 (empty modes) degenerates to the closed two-mode problem.
MomentsResult evolve_moments(const SystemParams& params, const BathModes& modes,
                             const TimeGrid& grid, const Schedule& sched,
                             const MomentOptions& opts = {});

/// Transport rates assembled from a state.
TransportRates transport_rates(const MomentState& state, const SystemParams& params,
                               const BathModes& modes);

struct AuditResult {
    double max_residual_a = 0.0;
    double max_residual_b = 0.0;
    double max_rate_b = 0.0;  ///< max |dN_b/dt| for scale
};

/// Central-difference dN/dt against the assembled rates; residuals are
/// O(dt^2) for a converged run.
AuditResult finite_difference_audit(const MomentSeries& series, const TimeGrid& grid);

}  // namespace nmopt
