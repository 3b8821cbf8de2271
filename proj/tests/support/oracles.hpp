#pragma once

// Test-only oracles, independent of the implementation paths they check:
// brute-force quadrature, closed forms, and the naive O(N^2)-per-point
// double-sum phonon-number reference.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "nmopt/classical.hpp"
#include "nmopt/model.hpp"
#include "nmopt/occupancy.hpp"
#include "nmopt/propagator.hpp"
#include "nmopt/spectral.hpp"

namespace oracles {

using nmopt::cd;

/// Composite Simpson rule with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t n = 20000) {
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double acc = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) acc += f(a + h * i) * ((i % 2) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// Closed form int_0^inf J(w) sin(w t) dw for the Ohmic family:
/// eta w0^2 Gamma(s+1) Im[(1 - i w0 t)^{-(s+1)}].
inline double ohmic_sin_transform(double eta, double s, double w0, double t) {
    const cd z = std::pow(cd(1.0, -w0 * t), -(s + 1.0));
    return eta * w0 * w0 * std::tgamma(s + 1.0) * z.imag();
}

/// Mean phonon number assembled with the naive double sum at every grid
/// point, using the same trapezoid weights and the same discrete C3 kernel
/// representation as the fast path. O(N^2) per point; keep N small.
inline std::vector<double> naive_phonon_number(
    const nmopt::PropagatorPair& pair, const nmopt::ClassicalTrajectory& traj,
    const nmopt::PhaseIntegral& phase, const nmopt::SpectralModel& model,
    const nmopt::QuadratureRule& channels, const nmopt::SystemParams& params,
    const nmopt::TimeGrid& grid) {
    const std::size_t n = grid.size();
    const double dt = grid.dt;

    std::vector<cd> W(n);
    for (std::size_t i = 0; i < n; ++i) W[i] = pair.L[i] + std::conj(pair.M[i]);

    // tabulate the channel-rule C3 for lags -t_end .. t_end
    std::vector<double> wJ_vac(channels.size()), wJ_th(channels.size());
    for (std::size_t j = 0; j < channels.size(); ++j) {
        const double J = nmopt::eval_J(model, channels.nodes[j]);
        const double N = model.occupation(channels.nodes[j], params);
        wJ_vac[j] = channels.weights[j] * J * (N + 1.0);
        wJ_th[j] = channels.weights[j] * J * N;
    }
    std::vector<cd> C3(2 * n - 1);
    for (std::size_t m = 0; m < 2 * n - 1; ++m) {
        const double lag = (static_cast<double>(m) - static_cast<double>(n - 1)) * dt;
        cd acc = 0.0;
        for (std::size_t j = 0; j < channels.size(); ++j) {
            acc += wJ_vac[j] * std::polar(1.0, -channels.nodes[j] * lag);
            acc += wJ_th[j] * std::polar(1.0, channels.nodes[j] * lag);
        }
        C3[m] = acc;
    }

    std::vector<cd> A(n), B(n), q2(n);
    for (std::size_t i = 0; i < n; ++i) {
        A[i] = traj.G[i] * std::exp(-std::conj(phase.U[i]));
        B[i] = std::conj(traj.G[i]) * std::exp(-phase.U[i]);
        q2[i] = std::norm(traj.G[i]) * (1.0 - std::exp(-2.0 * phase.U[i].real()));
    }

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        cd total = (std::norm(pair.M[i]) + std::norm(pair.L[i])) * params.m0 +
                   std::norm(pair.L[i]);
        if (i == 0) {  // empty double integral
            out[i] = total.real();
            continue;
        }
        for (std::size_t m1 = 0; m1 <= i; ++m1) {
            const double w1 = (m1 == 0 || m1 == i) ? 0.5 : 1.0;
            const cd P1 = W[i - m1];  // L(t - tau1) + M*(t - tau1)
            for (std::size_t m2 = 0; m2 <= i; ++m2) {
                const double w2 = (m2 == 0 || m2 == i) ? 0.5 : 1.0;
                const cd P2c = std::conj(W[i - m2]);
                const cd f1 = params.n0 * A[m1] * std::conj(A[m2]) +
                              (params.n0 + 1.0) * B[m1] * std::conj(B[m2]);
                const cd f2 = q2[m1];
                const cd f3 = C3[static_cast<std::size_t>(
                    static_cast<long long>(m1) - static_cast<long long>(m2) +
                    static_cast<long long>(n - 1))];
                total += w1 * w2 * dt * dt * P1 * P2c * (f1 + f2 + f3);
            }
        }
        out[i] = total.real();
    }
    return out;
}

}  // namespace oracles
