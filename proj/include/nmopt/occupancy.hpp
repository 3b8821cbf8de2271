#pragma once

// Mean phonon number
//
//   N_b(t) = [|M|^2 + |L|^2] m0 + |L|^2
//          + int int dtau1 dtau2 [L + M*](t - tau1) [L* + M](t - tau2)
//            x [f1 + f2 + f3](tau1, tau2)
//
// evaluated without the naive O(N^2)-per-point double sum:
//  - f1 separates into products of single-tau functions through
//    e^{+-u(tau1 - tau2)} = e^{-+[U(tau1) - U(tau2)]}; four ordinary
//    convolutions against W(s) = L(s) + M*(s) remain.
//  - f2 depends on tau1 only; the tau2 integral collapses to a running
//    integral of W*.
//  - f3(tau1, tau2) = C3(tau1 - tau2) factorizes per quadrature node into
//    |int_0^t e^{+-i w s} W(s) ds|^2, maintained as running integrals: the
//    whole bath term costs O(N * N_omega) in total.

#include <vector>

#include "nmopt/classical.hpp"
#include "nmopt/model.hpp"
#include "nmopt/propagator.hpp"
#include "nmopt/spectral.hpp"

namespace nmopt {

struct OccupancySeries {
    std::vector<double> N_b;
    std::vector<double> homogeneous;  ///< [|M|^2 + |L|^2] m0 + |L|^2
    std::vector<double> f1_part;      ///< cavity-photon term
    std::vector<double> f2_part;      ///< cavity input-noise term
    std::vector<double> f3_part;      ///< oscillator-bath term
    std::vector<double> im_residual;  ///< imaginary remainder of the assembly

    std::size_t size() const { return N_b.size(); }
};

struct OccupancyOptions {
    bool markovian = false;  ///< bath term from the flat-spectrum limit
    double gamma_m = 0.0;
};

OccupancySeries phonon_number(const PropagatorPair& pair, const ClassicalTrajectory& traj,
                              const PhaseIntegral& phase, const SpectralModel& model,
                              const QuadratureRule& channels, const SystemParams& params,
                              const TimeGrid& grid, const OccupancyOptions& opts = {});

struct ComponentBreakdown {
    double homogeneous;
    double f1_part;
    double f2_part;
    double f3_part;
};

/// Components at a grid time (t must lie on the grid).
ComponentBreakdown component_report(const OccupancySeries& series, const TimeGrid& grid,
                                    double t);

}  // namespace nmopt
