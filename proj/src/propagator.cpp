#include "nmopt/propagator.hpp"

#include <cmath>

namespace nmopt {

namespace {
constexpr double kPropagatorGuard = 1e6;
constexpr double kPhaseGuard = 650.0;  // Re U beyond this overflows e^{U}
}  // namespace

bool DressedKernel::has_dressing() const {
    if (G.empty()) return false;
    for (const auto& g : G)
        if (std::abs(g) > 0.0) return true;
    return false;
}

DressedKernel build_dressed_kernel(const SystemParams& params, const std::vector<cd>& f_table,
                                   const ClassicalTrajectory& traj, const PhaseIntegral& phase,
                                   bool markovian, bool rwa, bool beam_splitter_only) {
    DressedKernel k;
    k.omega_m = params.omega_m;
    k.f = f_table;
    k.markovian = markovian;
    k.gamma_m = params.gamma_m;
    k.G = traj.G;
    k.U = phase.U;
    k.rwa = rwa;
    k.beam_splitter_only = beam_splitter_only;
    for (const auto& u : k.U)
        if (u.real() > kPhaseGuard)
            throw DivergenceError("phase_overflow",
                                  "Re U exceeds 650; e^{U} not representable");
    return k;
}

cd eval_F(const DressedKernel& kernel, const TimeGrid& grid, std::size_t i, std::size_t j) {
    cd value = 0.0;
    if (!kernel.markovian && !kernel.f.empty()) value = kernel.f[i - j];
    if (!kernel.G.empty()) {
        const cd a = std::conj(kernel.G[i]) * kernel.G[j] *
                     std::exp(kernel.U[j] - kernel.U[i]);
        value -= a - std::conj(a);
    }
    (void)grid;
    return value;
}

bool check_stationarity(const DressedKernel& kernel, const TimeGrid& grid) {
    const std::size_t n = kernel.U.empty() ? (kernel.f.empty() ? 0 : kernel.f.size())
                                           : kernel.U.size();
    if (n < 3) return true;
    double scale = 0.0, dev = 0.0;
    for (std::size_t lag : {n / 7 + 1, n / 3, n / 2, n - 1}) {
        if (lag == 0 || lag >= n) continue;
        const cd ref = eval_F(kernel, grid, lag, 0);
        scale = std::max(scale, std::abs(ref));
        for (std::size_t i = lag; i < n; i += std::max<std::size_t>(1, (n - lag) / 5)) {
            dev = std::max(dev, std::abs(eval_F(kernel, grid, i, i - lag) - ref));
            scale = std::max(scale, std::abs(eval_F(kernel, grid, i, i - lag)));
        }
    }
    return dev <= 1e-12 * std::max(scale, 1e-30);
}

PropagatorPair solve_ML(const DressedKernel& kernel, const TimeGrid& grid) {
    const std::size_t n = grid.size();
    const double dt = grid.dt;
    const double wm = kernel.omega_m;
    const bool markov = kernel.markovian;
    const bool rwa = kernel.rwa || kernel.beam_splitter_only;
    const bool bs = kernel.beam_splitter_only;
    const bool dressing = kernel.has_dressing();
    const bool has_f = !kernel.f.empty() && !markov;

    PropagatorPair pair;
    pair.M.assign(n, cd(0.0, 0.0));
    pair.L.assign(n, cd(0.0, 0.0));
    pair.M[0] = 1.0;

    // co-rotating envelopes: m = M e^{+i wm t}, l = L e^{-i wm t}
    cd m_rot = 1.0, l_rot = 0.0;

    std::vector<cd> h(n, cd(0.0, 0.0));  // M + L (M alone under RWA)
    h[0] = 1.0;

    // dressing tables A = G e^{U}, B = G* e^{U*}; the factors at the outer
    // time are D_plus = -G*(t) e^{-U(t)}, D_minus = +G(t) e^{-U*(t)}
    std::vector<cd> A(dressing ? n : 0), B((dressing && !bs) ? n : 0);
    if (dressing)
        for (std::size_t i = 0; i < n; ++i) {
            A[i] = kernel.G[i] * std::exp(kernel.U[i]);
            if (!bs) B[i] = std::conj(kernel.G[i]) * std::exp(std::conj(kernel.U[i]));
        }

    // running trapezoid partial sums dt [phi_0/2 + phi_1 + ... + phi_{j-1}];
    // the half-weight diagonal terms cancel between the two brackets of F
    // (and are Heun-corrected in beam-splitter mode where they survive)
    cd Tp = 0.0, Tm = 0.0;

    const std::vector<cd>& f_conv = bs ? kernel.f_bs : kernel.f;
    const bool has_conv = bs ? !kernel.f_bs.empty() : has_f;

    // memory integral at index j given the current-endpoint value h_j
    auto eval_I = [&](std::size_t j, const cd& h_j, const cd& conv) -> cd {
        cd I = conv;
        if (bs) I = -conv;  // beam-splitter kernel enters as -int J e^{-iw s}
        if (markov) I += -0.5 * kernel.gamma_m * h_j;
        if (dressing) {
            const cd Dp = -std::conj(kernel.G[j]) * std::exp(-kernel.U[j]);
            if (bs) {
                I += Dp * (Tp + 0.5 * dt * A[j] * h_j);
            } else {
                const cd Dm = kernel.G[j] * std::exp(-std::conj(kernel.U[j]));
                I += Dp * Tp + Dm * Tm;  // diagonals cancel exactly
            }
        }
        if (bs && has_conv) I += -0.5 * dt * f_conv[0] * h_j;  // nonzero diagonal
        return I;
    };

    // trapezoidal convolution over committed history (excludes the diagonal)
    auto conv_at = [&](std::size_t j) -> cd {
        if (!has_conv || j == 0) return cd(0.0, 0.0);
        cd acc = 0.5 * f_conv[j] * h[0];
        for (std::size_t m = 1; m < j; ++m) acc += f_conv[j - m] * h[m];
        return acc * dt;
    };

    cd conv_here = 0.0;  // conv_at(i), carried across steps
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t0 = grid.t(i);
        const double t1 = grid.t(i + 1);
        const cd I_i = eval_I(i, h[i], conv_here);
        const cd e_plus0 = std::polar(1.0, wm * t0);
        const cd rhs_m0 = e_plus0 * I_i;
        const cd rhs_l0 = -std::conj(e_plus0) * I_i;

        // predictor
        const cd e_plus1 = std::polar(1.0, wm * t1);
        cd m_pred = m_rot + dt * rhs_m0;
        cd l_pred = rwa ? cd(0.0, 0.0) : l_rot + dt * rhs_l0;
        cd h_pred = m_pred * std::conj(e_plus1);
        if (!rwa) h_pred += l_pred * e_plus1;

        // commit running dressing sums up to index i for use at index i+1;
        // the very first sample enters with its trapezoid half weight
        if (dressing) {
            const double wgt = (i == 0) ? 0.5 * dt : dt;
            Tp += wgt * A[i] * h[i];
            if (!bs) Tm += wgt * B[i] * h[i];
        }

        const cd conv_next = conv_at(i + 1);
        const cd I_next = eval_I(i + 1, h_pred, conv_next);
        const cd rhs_m1 = e_plus1 * I_next;
        const cd rhs_l1 = -std::conj(e_plus1) * I_next;

        m_rot += 0.5 * dt * (rhs_m0 + rhs_m1);
        if (!rwa) l_rot += 0.5 * dt * (rhs_l0 + rhs_l1);

        pair.M[i + 1] = m_rot * std::conj(e_plus1);
        pair.L[i + 1] = rwa ? cd(0.0, 0.0) : l_rot * e_plus1;
        h[i + 1] = pair.M[i + 1] + pair.L[i + 1];
        conv_here = conv_next;

        if (std::abs(pair.M[i + 1]) > kPropagatorGuard)
            throw DivergenceError("propagator", "|M| exceeded 1e6 at t = " +
                                                    std::to_string(t1) +
                                                    " (unstable configuration)");
    }
    return pair;
}

}  // namespace nmopt
