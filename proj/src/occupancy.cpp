#include "nmopt/occupancy.hpp"

#include <cmath>
#include <stdexcept>

namespace nmopt {

namespace {

// trapezoidal convolution (q * W)(t_n) = int_0^{t_n} q(tau) W(t_n - tau) dtau
std::vector<cd> convolve(const std::vector<cd>& q, const std::vector<cd>& W, double dt) {
    const std::size_t n = W.size();
    std::vector<cd> out(n, cd(0.0, 0.0));
    for (std::size_t i = 1; i < n; ++i) {
        cd acc = 0.5 * (q[0] * W[i] + q[i] * W[0]);
        for (std::size_t m = 1; m < i; ++m) acc += q[m] * W[i - m];
        out[i] = acc * dt;
    }
    return out;
}

}  // namespace

OccupancySeries phonon_number(const PropagatorPair& pair, const ClassicalTrajectory& traj,
                              const PhaseIntegral& phase, const SpectralModel& model,
                              const QuadratureRule& channels, const SystemParams& params,
                              const TimeGrid& grid, const OccupancyOptions& opts) {
    const std::size_t n = grid.size();
    if (pair.M.size() != n || traj.G.size() != n || phase.U.size() != n)
        throw std::invalid_argument("phonon_number: series not on the given grid");
    const double dt = grid.dt;

    OccupancySeries out;
    out.N_b.assign(n, 0.0);
    out.homogeneous.assign(n, 0.0);
    out.f1_part.assign(n, 0.0);
    out.f2_part.assign(n, 0.0);
    out.f3_part.assign(n, 0.0);
    out.im_residual.assign(n, 0.0);

    // W(s) = L(s) + M*(s); the propagator factors are P_t(tau) = W(t - tau)
    std::vector<cd> W(n);
    for (std::size_t i = 0; i < n; ++i) W[i] = pair.L[i] + std::conj(pair.M[i]);

    for (std::size_t i = 0; i < n; ++i)
        out.homogeneous[i] = (std::norm(pair.M[i]) + std::norm(pair.L[i])) * params.m0 +
                             std::norm(pair.L[i]);

    bool has_G = false;
    for (const auto& g : traj.G)
        if (std::abs(g) > 0.0) has_G = true;

    std::vector<double> f1(n, 0.0);
    std::vector<cd> f2(n, cd(0.0, 0.0));
    if (has_G) {
        // cavity initial-condition kernel from the exact autocorrelation
        // <A0(tau1) A0(tau2)>: f1 = n0 A(tau1) A*(tau2) + (n0+1) B(tau1) B*(tau2)
        // with A = G e^{u*}, B = G* e^{u} and u(tau) = -U(tau); both factors
        // decay with Re U, so the assembly stays bounded under kappa switches
        std::vector<cd> A(n), B(n), q2(n);
        for (std::size_t i = 0; i < n; ++i) {
            A[i] = traj.G[i] * std::exp(-std::conj(phase.U[i]));
            B[i] = std::conj(traj.G[i]) * std::exp(-phase.U[i]);
            // f2(tau1) = |G|^2 (1 - e^{-2 Re U}); reduces to 1 - e^{-kappa tau}
            // for constant kappa
            q2[i] = std::norm(traj.G[i]) * (1.0 - std::exp(-2.0 * phase.U[i].real()));
        }
        const std::vector<cd> Ya = convolve(A, W, dt);
        const std::vector<cd> Yb = convolve(B, W, dt);
        const std::vector<cd> Q2w = convolve(q2, W, dt);

        // running integral IW(t) = int_0^t W
        cd IW = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) IW += 0.5 * dt * (W[i - 1] + W[i]);
            f1[i] = params.n0 * std::norm(Ya[i]) + (params.n0 + 1.0) * std::norm(Yb[i]);
            f2[i] = Q2w[i] * std::conj(IW);
        }
    }

    // bath term f3
    if (opts.markovian) {
        // flat-spectrum limit: the resonant part of C3 acts as
        // gamma_m * n_th * delta(tau1 - tau2)
        const double n_th = params.thermal_occupation_at(params.omega_m);
        double Q = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) Q += 0.5 * dt * (std::norm(W[i - 1]) + std::norm(W[i]));
            out.f3_part[i] = opts.gamma_m * n_th * Q;
        }
    } else if (!channels.nodes.empty() && !model.is_flat()) {
        const std::size_t nw = channels.size();
        std::vector<double> wJ_vac(nw), wJ_th(nw);
        bool any = false;
        for (std::size_t j = 0; j < nw; ++j) {
            const double J = eval_J(model, channels.nodes[j]);
            const double N = model.occupation(channels.nodes[j], params);
            wJ_vac[j] = channels.weights[j] * J * (N + 1.0);
            wJ_th[j] = channels.weights[j] * J * N;
            if (J != 0.0) any = true;
        }
        if (any) {
            // per-frequency running integrals I+-_j(t) = int_0^t e^{+-i w_j s} W(s) ds
            std::vector<cd> Ip(nw, cd(0, 0)), Im(nw, cd(0, 0));
            std::vector<cd> rot(nw), rot_step(nw), prev_p(nw), prev_m(nw);
            for (std::size_t j = 0; j < nw; ++j) {
                rot[j] = 1.0;
                rot_step[j] = std::polar(1.0, channels.nodes[j] * dt);
                prev_p[j] = W[0];
                prev_m[j] = W[0];
            }
            for (std::size_t i = 1; i < n; ++i) {
                double f3 = 0.0;
                const bool resync = (i % 512) == 0;
                for (std::size_t j = 0; j < nw; ++j) {
                    rot[j] = resync ? std::polar(1.0, channels.nodes[j] * grid.t(i))
                                    : rot[j] * rot_step[j];
                    const cd term_p = rot[j] * W[i];
                    const cd term_m = std::conj(rot[j]) * W[i];
                    Ip[j] += 0.5 * dt * (prev_p[j] + term_p);
                    Im[j] += 0.5 * dt * (prev_m[j] + term_m);
                    prev_p[j] = term_p;
                    prev_m[j] = term_m;
                    f3 += wJ_vac[j] * std::norm(Ip[j]) + wJ_th[j] * std::norm(Im[j]);
                }
                out.f3_part[i] = f3;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        out.f1_part[i] = f1[i];
        out.f2_part[i] = f2[i].real();
        out.im_residual[i] = f2[i].imag();
        out.N_b[i] = out.homogeneous[i] + out.f1_part[i] + out.f2_part[i] + out.f3_part[i];
    }
    return out;
}

ComponentBreakdown component_report(const OccupancySeries& series, const TimeGrid& grid,
                                    double t) {
    const double idx_f = t / grid.dt;
    const auto idx = static_cast<std::size_t>(std::llround(idx_f));
    if (idx >= series.size() || std::abs(idx_f - static_cast<double>(idx)) > 1e-9)
        throw std::invalid_argument("component_report: t is not on the grid");
    return {series.homogeneous[idx], series.f1_part[idx], series.f2_part[idx],
            series.f3_part[idx]};
}

}  // namespace nmopt
