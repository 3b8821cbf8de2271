#pragma once

// Dressed memory kernel F and the coupled Volterra equations for the
// Bogoliubov propagators,
//
//   M'(t) = -i wm M + int_0^t F(t,tau) [M + L](tau) dtau,
//   L'(t) = +i wm L + int_0^t F*(t,tau) [M + L](tau) dtau,
//
// with F(t,tau) = f(t-tau) - [G*(t) G(tau) e^{U(tau)-U(t)} - H.c.]. Both the
// bath part f and the radiation-pressure bracket are purely imaginary, so
// F* = -F and one memory integral serves both equations. The bracket is
// separable in (t, tau); it is carried by two running sums, leaving only the
// stationary f convolution at O(N) per step.

#include <vector>

#include "nmopt/classical.hpp"
#include "nmopt/model.hpp"

namespace nmopt {

struct DressedKernel {
    double omega_m = 1.0;
    std::vector<cd> f;        ///< stationary kernel on the grid; empty = none
    bool markovian = false;   ///< f-convolution replaced by -(gamma_m/2)[M+L]
    double gamma_m = 0.0;
    std::vector<cd> G;        ///< linear coupling on the grid; empty = no dressing
    std::vector<cd> U;        ///< phase integral on the grid (with G)
    bool rwa = false;                ///< drop L entirely
    bool beam_splitter_only = false; ///< keep only co-rotating kernel parts
    std::vector<cd> f_bs;     ///< int J e^{-i w sigma} dw table (beam-splitter mode)

    bool has_dressing() const;
};

struct PropagatorPair {
    std::vector<cd> M;
    std::vector<cd> L;
};

DressedKernel build_dressed_kernel(const SystemParams& params, const std::vector<cd>& f_table,
                                   const ClassicalTrajectory& traj, const PhaseIntegral& phase,
                                   bool markovian = false, bool rwa = false,
                                   bool beam_splitter_only = false);

/// Evaluate F(t_i, t_j) from the tables (used by stationarity checks and the
/// naive double-sum oracle).
cd eval_F(const DressedKernel& kernel, const TimeGrid& grid, std::size_t i, std::size_t j);

/// Second-order Volterra stepping (trapezoidal history, Heun corrector).
/// M(0) = 1 and L(0) = 0 exactly; the local rotation is handled in the
/// co-rotating frame so a vanishing kernel gives |M| = 1 to machine precision.
PropagatorPair solve_ML(const DressedKernel& kernel, const TimeGrid& grid);

/// True iff F(t,tau) is numerically a function of t - tau only (max deviation
/// below 1e-12 on sampled pairs).
bool check_stationarity(const DressedKernel& kernel, const TimeGrid& grid);

}  // namespace nmopt
