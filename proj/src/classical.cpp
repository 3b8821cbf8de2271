#include "nmopt/classical.hpp"

#include <cmath>

namespace nmopt {

namespace {

constexpr double kAmplitudeGuard = 1e9;

// One exact step of alpha' = -lambda*alpha + E across [t0, t0+dt], splitting
// at schedule switch times so piecewise-constant coefficients stay exact.
cd propagate_cavity(cd alpha, double t0, double dt, double delta_prime, const Schedule& sched,
                    const SystemParams& params) {
    double t = t0;
    const double t1 = t0 + dt;
    while (t < t1 - 1e-15 * (1.0 + t1)) {
        // next switch strictly inside (t, t1)
        double t_next = t1;
        for (const auto& [ts, val] : sched.kappa_steps) {
            (void)val;
            if (ts > t + 1e-15 && ts < t_next) t_next = std::min(t_next, ts);
        }
        for (const auto& [ts, val] : sched.drive_steps) {
            (void)val;
            if (ts > t + 1e-15 && ts < t_next) t_next = std::min(t_next, ts);
        }
        const auto [kappa, E] = value_at(sched, params, t);
        const cd lambda(kappa / 2.0, delta_prime);
        const cd alpha_ss = E / lambda;
        alpha = alpha_ss + (alpha - alpha_ss) * std::exp(-lambda * (t_next - t));
        t = t_next;
    }
    return alpha;
}

}  // namespace

PhaseIntegral sideband_lock(const SystemParams& params, const TimeGrid& grid,
                            const Schedule& sched) {
    PhaseIntegral phase;
    phase.U.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.t(i);
        phase.U[i] = cd(0.5 * kappa_integral(sched, params, t), params.omega_m * t);
    }
    return phase;
}

std::pair<ClassicalTrajectory, PhaseIntegral> evolve_classical(
    const SystemParams& params, const std::vector<cd>& f_table, const TimeGrid& grid,
    const Schedule& sched, const ClassicalOptions& opts) {
    const std::size_t n = grid.size();
    const double dt = grid.dt;
    const double wm = params.omega_m;
    const bool locked = opts.drive_model == DriveModel::Locked;
    const bool has_memory = !f_table.empty();

    ClassicalTrajectory traj;
    traj.alpha.resize(n);
    traj.beta.resize(n);
    traj.delta_eff.resize(n);
    traj.G.resize(n);

    traj.alpha[0] = params.alpha0;
    traj.beta[0] = params.beta0;
    traj.delta_eff[0] =
        locked ? wm : params.delta_c - 2.0 * params.g0 * params.beta0.real();
    traj.G[0] = params.g0 * params.alpha0;

    // displacement history beta + beta* entering the memory convolution
    std::vector<double> disp(n, 0.0);
    disp[0] = 2.0 * traj.beta[0].real();

    // trapezoidal history sum int_0^{t_idx} f(t_idx - tau) disp(tau) dtau;
    // f(0) = 0, so the diagonal never contributes and the sum is explicit
    auto history = [&](std::size_t idx) -> cd {
        if (opts.markovian) return cd(-0.5 * opts.gamma_m * disp[idx], 0.0);
        if (!has_memory || idx == 0) return cd(0.0, 0.0);
        cd acc = 0.5 * f_table[idx] * disp[0];
        for (std::size_t m = 1; m < idx; ++m) acc += f_table[idx - m] * disp[m];
        return acc * dt;
    };

    // beta solved in the frame co-rotating at omega_m; forcing term
    // g(t) = e^{i wm t} [ i g0 |alpha|^2 + memory ]
    auto beta_rhs = [&](std::size_t idx, const cd& alpha_i, const cd& hist) -> cd {
        const cd forcing = cd(0.0, params.g0) * std::norm(alpha_i) + hist;
        return std::polar(1.0, wm * grid.t(idx)) * forcing;
    };

    cd beta_rot = params.beta0;  // beta(t) e^{+i wm t}

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t0 = grid.t(i);
        const cd hist_i = history(i);
        const cd rhs_i = beta_rhs(i, traj.alpha[i], hist_i);

        // predictor
        cd beta_rot_pred = beta_rot + dt * rhs_i;
        cd beta_pred = beta_rot_pred * std::polar(1.0, -wm * grid.t(i + 1));
        disp[i + 1] = 2.0 * beta_pred.real();

        // cavity step; in the self-consistent mode Delta' varies continuously,
        // use the midpoint of the current and predicted values
        double dp_mid;
        if (locked) {
            dp_mid = wm;
        } else {
            const double dp_now = params.delta_c - params.g0 * disp[i];
            const double dp_pred = params.delta_c - params.g0 * disp[i + 1];
            dp_mid = 0.5 * (dp_now + dp_pred);
        }
        traj.alpha[i + 1] = propagate_cavity(traj.alpha[i], t0, dt, dp_mid, sched, params);

        // corrector for beta (history at i+1 is fully determined: f(0) = 0,
        // and in Markovian mode the local term uses the predicted endpoint)
        const cd hist_ip1 = history(i + 1);
        const cd rhs_ip1 = beta_rhs(i + 1, traj.alpha[i + 1], hist_ip1);
        beta_rot += 0.5 * dt * (rhs_i + rhs_ip1);

        traj.beta[i + 1] = beta_rot * std::polar(1.0, -wm * grid.t(i + 1));
        disp[i + 1] = 2.0 * traj.beta[i + 1].real();
        traj.delta_eff[i + 1] =
            locked ? wm : params.delta_c - params.g0 * disp[i + 1];
        traj.G[i + 1] = params.g0 * traj.alpha[i + 1];

        if (std::abs(traj.alpha[i + 1]) > kAmplitudeGuard ||
            std::abs(traj.beta[i + 1]) > kAmplitudeGuard)
            throw DivergenceError("classical",
                                  "classical amplitude exceeded 1e9 at t = " +
                                      std::to_string(grid.t(i + 1)));
    }

    PhaseIntegral phase;
    if (locked) {
        phase = sideband_lock(params, grid, sched);
    } else {
        phase.U.resize(n);
        phase.U[0] = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double re = 0.5 * kappa_integral(sched, params, grid.t(i + 1));
            const double im = phase.U[i].imag() +
                              0.5 * dt * (traj.delta_eff[i] + traj.delta_eff[i + 1]);
            phase.U[i + 1] = cd(re, im);
        }
    }
    return {std::move(traj), std::move(phase)};
}

}  // namespace nmopt
