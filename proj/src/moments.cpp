#include "nmopt/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace nmopt {

namespace {

// state layout: [N_a, N_b, adb, ab, a2, b2, alpha | adbk.. abk.. bdbk.. bbk.. bk2.. hc..]
constexpr std::size_t kScalars = 7;
constexpr std::size_t iNa = 0, iNb = 1, iAdb = 2, iAb = 3, iA2 = 4, iB2 = 5, iAlpha = 6;

struct Workspace {
    const SystemParams* params;
    const BathModes* modes;
    const Schedule* sched;
    const MomentOptions* opts;
    std::vector<double> N_k;
    double omega_m;
};

std::size_t block(std::size_t K, std::size_t which) { return kScalars + which * K; }

cd coupling_G(const Workspace& ws, const std::vector<cd>& y, double t,
              const TimeGrid& grid) {
    if (ws.opts->constant_G) return ws.opts->G_const;
    if (ws.opts->locked) return ws.params->g0 * y[iAlpha];
    // trajectory-driven: linear interpolation between grid samples
    const auto& G = ws.opts->traj->G;
    const double x = t / grid.dt;
    const auto i = static_cast<std::size_t>(x);
    if (i + 1 >= G.size()) return G.back();
    const double frac = x - static_cast<double>(i);
    return G[i] * (1.0 - frac) + G[i + 1] * frac;
}

double detuning(const Workspace& ws, double t, const TimeGrid& grid) {
    if (ws.opts->locked || ws.opts->constant_G) return ws.omega_m;
    const auto& d = ws.opts->traj->delta_eff;
    const double x = t / grid.dt;
    const auto i = static_cast<std::size_t>(x);
    if (i + 1 >= d.size()) return d.back();
    const double frac = x - static_cast<double>(i);
    return d[i] * (1.0 - frac) + d[i + 1] * frac;
}

// Full second-moment derivatives including all counter-rotating blocks;
// only same-mode bath moments are kept and N_k stays constant.
void derivative(const Workspace& ws, const TimeGrid& grid, double t,
                const std::vector<cd>& y, std::vector<cd>& dy) {
    const std::size_t K = ws.modes->size();
    const double wm = ws.omega_m;
    const auto [kappa, E] = value_at(*ws.sched, *ws.params, t);
    const double dp = detuning(ws, t, grid);
    const cd G = coupling_G(ws, y, t, grid);
    const cd Gc = std::conj(G);
    const cd I(0.0, 1.0);

    const cd Na = y[iNa], Nb = y[iNb], adb = y[iAdb], ab = y[iAb], a2 = y[iA2], b2 = y[iB2];

    cd sum_nb = 0.0;   // V_k (bbk - bbk* + bdbk* - bdbk)
    cd sum_adb = 0.0;  // V_k (adbk + abk*)
    cd sum_ab = 0.0;   // V_k (abk + adbk*)
    cd sum_b2 = 0.0;   // V_k (bbk + bdbk*)
    const std::size_t oAdbk = block(K, 0), oAbk = block(K, 1), oBdbk = block(K, 2),
                      oBbk = block(K, 3), oBk2 = block(K, 4), oHc = block(K, 5);
    for (std::size_t k = 0; k < K; ++k) {
        const double V = ws.modes->V[k];
        const cd adbk = y[oAdbk + k], abk = y[oAbk + k], bdbk = y[oBdbk + k],
                 bbk = y[oBbk + k];
        sum_nb += V * (bbk - std::conj(bbk) + std::conj(bdbk) - bdbk);
        sum_adb += V * (adbk + std::conj(abk));
        sum_ab += V * (abk + std::conj(adbk));
        sum_b2 += V * (bbk + std::conj(bdbk));
    }

    const cd optical = G * adb - std::conj(G * adb) + G * std::conj(ab) -
                       std::conj(G * std::conj(ab));

    dy[iNa] = -kappa * Na + I * optical;
    dy[iNb] = -I * optical + I * sum_nb;
    dy[iAdb] = -(I * (wm - dp) + kappa / 2.0) * adb -
               I * (Gc * b2 + Gc * Nb - Gc * Na - G * std::conj(a2)) - I * sum_adb;
    dy[iAb] = -(I * (dp + wm) + kappa / 2.0) * ab +
              I * (G * b2 + G * Nb + Gc * a2 + G * (Na + 1.0)) - I * sum_ab;
    dy[iA2] = -(2.0 * I * dp + kappa) * a2 + 2.0 * I * G * (ab + std::conj(adb));
    dy[iB2] = -2.0 * I * wm * b2 + 2.0 * I * (Gc * ab + G * adb) - 2.0 * I * sum_b2;
    dy[iAlpha] = ws.opts->locked ? -(I * wm + kappa / 2.0) * y[iAlpha] + E : cd(0.0, 0.0);

    for (std::size_t k = 0; k < K; ++k) {
        const double V = ws.modes->V[k];
        const double wk = ws.modes->omega[k];
        const double Nk = ws.N_k[k];
        const cd adbk = y[oAdbk + k], abk = y[oAbk + k], bdbk = y[oBdbk + k],
                 bbk = y[oBbk + k], bk2 = y[oBk2 + k];
        dy[oAdbk + k] = -(I * (wk - dp) + kappa / 2.0) * adbk - I * Gc * (bbk + bdbk) -
                        I * V * (adb + std::conj(ab));
        dy[oAbk + k] = -(I * (dp + wk) + kappa / 2.0) * abk + I * G * (bbk + bdbk) -
                       I * V * (ab + std::conj(adb));
        dy[oBdbk + k] = I * (wm - wk) * bdbk - I * (Gc * abk + G * adbk) +
                        I * V * (bk2 + Nk - Nb - std::conj(b2));
        dy[oBbk + k] = -I * (wm + wk) * bbk + I * (Gc * abk + G * adbk) -
                       I * V * (bk2 + Nk + b2 + (Nb + 1.0));
        dy[oBk2 + k] = -2.0 * I * wk * bk2 - 2.0 * I * V * (bbk + bdbk);
        // audit channel: <b'b_k> driven by the (N_k - N_b) source alone
        dy[oHc + k] = I * (wm - wk) * y[oHc + k] + (Nk - Nb);
    }
}

TransportRates assemble_rates(const Workspace& ws, const std::vector<cd>& y, double kappa,
                              const cd& G) {
    const std::size_t K = ws.modes->size();
    TransportRates r{};
    r.v_kappa = kappa * y[iNa].real();
    // v_c = i(G<a'b> - G*<a'b>*) + i(G<ab>* - G*<ab>)
    r.v_c = -2.0 * std::imag(G * y[iAdb]) - 2.0 * std::imag(G * std::conj(y[iAb]));
    double dv = 0.0, dv_heat = 0.0;
    const std::size_t oBdbk = block(K, 2), oBbk = block(K, 3), oHc = block(K, 5);
    for (std::size_t k = 0; k < K; ++k) {
        const double V = ws.modes->V[k];
        dv += 2.0 * V * (std::imag(y[oBdbk + k]) - std::imag(y[oBbk + k]));
        dv_heat += 2.0 * V * V * std::real(y[oHc + k]);
    }
    r.dv = dv;
    r.dv_heat = dv_heat;
    r.v_a = -r.v_kappa + r.v_c;
    r.v_b = -r.v_c + r.dv;
    return r;
}

}  // namespace

MomentsResult evolve_moments(const SystemParams& params, const BathModes& modes,
                             const TimeGrid& grid, const Schedule& sched,
                             const MomentOptions& opts) {
    if (!opts.locked && !opts.constant_G && opts.traj == nullptr)
        throw std::invalid_argument("evolve_moments: trajectory required when not locked");

    const std::size_t K = modes.size();
    const std::size_t dim = kScalars + 6 * K;

    Workspace ws;
    ws.params = &params;
    ws.modes = &modes;
    ws.sched = &sched;
    ws.opts = &opts;
    ws.omega_m = params.omega_m;
    ws.N_k.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        ws.N_k[k] = opts.model ? opts.model->occupation(modes.omega[k], params)
                               : params.thermal_occupation_at(modes.omega[k]);

    std::vector<cd> y(dim, cd(0.0, 0.0));
    y[iNa] = params.n0;
    y[iNb] = params.m0;
    y[iAlpha] = params.alpha0;

    MomentsResult result;
    auto& s = result.series;
    const std::size_t n = grid.size();
    s.t.resize(n);
    s.N_a.resize(n);
    s.N_b.resize(n);
    s.adb.resize(n);
    s.ab.resize(n);
    s.a2.resize(n);
    s.b2.resize(n);
    s.v_a.resize(n);
    s.v_b.resize(n);
    s.v_c.resize(n);
    s.v_kappa.resize(n);
    s.dv.resize(n);
    s.dv_heat.resize(n);

    std::vector<cd> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    const double dt = grid.dt;

    auto record = [&](std::size_t i) {
        const double t = grid.t(i);
        const auto [kappa, E] = value_at(sched, params, t);
        (void)E;
        const cd G = coupling_G(ws, y, t, grid);
        const TransportRates r = assemble_rates(ws, y, kappa, G);
        s.t[i] = t;
        s.N_a[i] = y[iNa];
        s.N_b[i] = y[iNb];
        s.adb[i] = y[iAdb];
        s.ab[i] = y[iAb];
        s.a2[i] = y[iA2];
        s.b2[i] = y[iB2];
        s.v_a[i] = r.v_a;
        s.v_b[i] = r.v_b;
        s.v_c[i] = r.v_c;
        s.v_kappa[i] = r.v_kappa;
        s.dv[i] = r.dv;
        s.dv_heat[i] = r.dv_heat;
    };

    record(0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = grid.t(i);
        derivative(ws, grid, t, y, k1);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
        derivative(ws, grid, t + 0.5 * dt, tmp, k2);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
        derivative(ws, grid, t + 0.5 * dt, tmp, k3);
        for (std::size_t j = 0; j < dim; ++j) tmp[j] = y[j] + dt * k3[j];
        derivative(ws, grid, t + dt, tmp, k4);
        for (std::size_t j = 0; j < dim; ++j)
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

        const double nb = y[iNb].real();
        if (!std::isfinite(nb) || std::abs(nb) > 1e15)
            throw DivergenceError("moments", "moment system diverged at t = " +
                                                 std::to_string(grid.t(i + 1)));
        record(i + 1);
    }

    auto& fs = result.final_state;
    fs.t = grid.t_end();
    fs.N_a = y[iNa];
    fs.N_b = y[iNb];
    fs.adb = y[iAdb];
    fs.ab = y[iAb];
    fs.a2 = y[iA2];
    fs.b2 = y[iB2];
    fs.adbk.assign(y.begin() + block(K, 0), y.begin() + block(K, 0) + K);
    fs.abk.assign(y.begin() + block(K, 1), y.begin() + block(K, 1) + K);
    fs.bdbk.assign(y.begin() + block(K, 2), y.begin() + block(K, 2) + K);
    fs.bbk.assign(y.begin() + block(K, 3), y.begin() + block(K, 3) + K);
    fs.bk2.assign(y.begin() + block(K, 4), y.begin() + block(K, 4) + K);
    fs.hc.assign(y.begin() + block(K, 5), y.begin() + block(K, 5) + K);
    fs.N_k = ws.N_k;
    fs.G = coupling_G(ws, y, fs.t, grid);
    fs.kappa = value_at(sched, params, fs.t).first;
    return result;
}

TransportRates transport_rates(const MomentState& state, const SystemParams& params,
                               const BathModes& modes) {
    TransportRates r{};
    r.v_kappa = state.kappa * state.N_a.real();
    r.v_c = -2.0 * std::imag(state.G * state.adb) -
            2.0 * std::imag(state.G * std::conj(state.ab));
    double dv = 0.0, dv_heat = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        dv += 2.0 * modes.V[k] * (std::imag(state.bdbk[k]) - std::imag(state.bbk[k]));
        if (k < state.hc.size())
            dv_heat += 2.0 * modes.V[k] * modes.V[k] * std::real(state.hc[k]);
    }
    r.dv = dv;
    r.dv_heat = dv_heat;
    r.v_a = -r.v_kappa + r.v_c;
    r.v_b = -r.v_c + r.dv;
    (void)params;
    return r;
}

AuditResult finite_difference_audit(const MomentSeries& series, const TimeGrid& grid) {
    AuditResult res;
    if (series.size() < 3) return res;
    const double dt = grid.dt;
    for (std::size_t i = 1; i + 1 < series.size(); ++i) {
        const double da = (series.N_a[i + 1].real() - series.N_a[i - 1].real()) / (2.0 * dt);
        const double db = (series.N_b[i + 1].real() - series.N_b[i - 1].real()) / (2.0 * dt);
        res.max_residual_a = std::max(res.max_residual_a, std::abs(da - series.v_a[i]));
        res.max_residual_b = std::max(res.max_residual_b, std::abs(db - series.v_b[i]));
        res.max_rate_b = std::max(res.max_rate_b, std::abs(db));
    }
    return res;
}

}  // namespace nmopt
