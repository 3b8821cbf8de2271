#include "nmopt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nmopt {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on P_p.
void gauss_legendre(std::size_t p, std::vector<double>& x, std::vector<double>& w) {
    x.assign(p, 0.0);
    w.assign(p, 0.0);
    const std::size_t m = (p + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(kPi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(p) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - static_cast<double>(j) * p2) /
                     (static_cast<double>(j) + 1.0);
            }
            pp = static_cast<double>(p) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[p - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[p - 1 - i] = w[i];
    }
}

// Legendre expansion coefficients a_n of g on [-1,1] sampled at the p-point
// GL nodes: a_n = (2n+1)/2 sum_k w_k g(x_k) P_n(x_k). Exact for g of degree
// <= p-1.
std::vector<double> legendre_coefficients(const std::vector<double>& x,
                                          const std::vector<double>& w,
                                          const double* g) {
    const std::size_t p = x.size();
    std::vector<double> a(p, 0.0);
    std::vector<double> pn(p, 1.0), pnm1(p, 0.0);
    for (std::size_t n = 0; n < p; ++n) {
        double acc = 0.0;
        for (std::size_t k = 0; k < p; ++k) acc += w[k] * g[k] * pn[k];
        a[n] = (2.0 * static_cast<double>(n) + 1.0) / 2.0 * acc;
        // advance P_{n} -> P_{n+1}
        for (std::size_t k = 0; k < p; ++k) {
            const double next = ((2.0 * n + 1.0) * x[k] * pn[k] - static_cast<double>(n) * pnm1[k]) /
                                (static_cast<double>(n) + 1.0);
            pnm1[k] = pn[k];
            pn[k] = next;
        }
    }
    return a;
}

struct FilonPanel {
    double center;
    double half_width;
    std::vector<double> an;
};

struct FilonPlan {
    std::vector<FilonPanel> panels;
    bool delta_rule = false;
    std::vector<double> delta_nodes;
    std::vector<double> delta_values;  // weight * g at each delta node
};

FilonPlan make_filon_plan(const QuadratureRule& rule, const std::vector<double>& g) {
    FilonPlan plan;
    if (rule.delta_rule) {
        plan.delta_rule = true;
        plan.delta_nodes = rule.nodes;
        plan.delta_values.resize(rule.size());
        for (std::size_t j = 0; j < rule.size(); ++j)
            plan.delta_values[j] = rule.weights[j] * g[j];
        return plan;
    }
    std::vector<double> x, w;
    std::size_t cached_order = 0;
    for (const auto& panel : rule.panels) {
        if (panel.order != cached_order) {
            gauss_legendre(panel.order, x, w);
            cached_order = panel.order;
        }
        FilonPanel fp;
        fp.center = panel.center;
        fp.half_width = panel.half_width;
        fp.an = legendre_coefficients(x, w, g.data() + panel.first_node);
        plan.panels.push_back(std::move(fp));
    }
    return plan;
}

cd eval_filon_plan(const FilonPlan& plan, double t, std::vector<double>& bessel_buf) {
    if (plan.delta_rule) {
        cd acc = 0.0;
        for (std::size_t j = 0; j < plan.delta_nodes.size(); ++j)
            acc += plan.delta_values[j] * std::polar(1.0, plan.delta_nodes[j] * t);
        return acc;
    }
    cd total = 0.0;
    for (const auto& panel : plan.panels) {
        const double theta = panel.half_width * t;
        const std::size_t nmax = panel.an.size() - 1;
        detail::spherical_bessel_jn(std::abs(theta), nmax, bessel_buf);
        // int_{-1}^{1} P_n(x) e^{i theta x} dx = 2 i^n j_n(theta), with
        // j_n(-theta) = (-1)^n j_n(theta); i^n (-1)^n = (-i)^n.
        const cd step = (theta >= 0.0) ? cd(0.0, 1.0) : cd(0.0, -1.0);
        cd ipow = 1.0;
        cd sum = 0.0;
        for (std::size_t n = 0; n <= nmax; ++n) {
            sum += panel.an[n] * 2.0 * ipow * bessel_buf[n];
            ipow *= step;
        }
        total += panel.half_width * std::polar(1.0, panel.center * t) * sum;
    }
    return total;
}

void append_panel(QuadratureRule& rule, double a, double b, std::size_t p,
                  const std::vector<double>& x, const std::vector<double>& w) {
    QuadratureRule::Panel panel;
    panel.center = 0.5 * (a + b);
    panel.half_width = 0.5 * (b - a);
    panel.first_node = rule.nodes.size();
    panel.order = p;
    for (std::size_t k = 0; k < p; ++k) {
        rule.nodes.push_back(panel.center + panel.half_width * x[k]);
        rule.weights.push_back(panel.half_width * w[k]);
    }
    rule.panels.push_back(panel);
}

std::vector<double> sample_J(const SpectralModel& model, const QuadratureRule& rule) {
    std::vector<double> g(rule.size());
    for (std::size_t j = 0; j < rule.size(); ++j) g[j] = eval_J(model, rule.nodes[j]);
    return g;
}

}  // namespace

namespace detail {

void spherical_bessel_jn(double theta, std::size_t nmax, std::vector<double>& out) {
    out.assign(nmax + 1, 0.0);
    if (theta < 0.1) {
        // series j_n = theta^n/(2n+1)!! [1 - (theta^2/2)/(1!(2n+3)) + ...]
        const double t2h = 0.5 * theta * theta;
        double prefac = 1.0;  // theta^n / (2n+1)!!
        for (std::size_t n = 0; n <= nmax; ++n) {
            double term = 1.0, sum = 1.0;
            for (int m = 1; m <= 4; ++m) {
                term *= -t2h / (static_cast<double>(m) * (2.0 * n + 2.0 * m + 1.0));
                sum += term;
            }
            out[n] = prefac * sum;
            prefac *= theta / (2.0 * n + 3.0);
        }
        return;
    }
    if (theta > static_cast<double>(nmax) + 10.0) {
        // forward recurrence, stable for n < theta
        const double s = std::sin(theta), c = std::cos(theta);
        double jm1 = s / theta;
        out[0] = jm1;
        if (nmax == 0) return;
        double j0 = s / (theta * theta) - c / theta;
        out[1] = j0;
        for (std::size_t n = 1; n < nmax; ++n) {
            const double jp1 = (2.0 * n + 1.0) / theta * j0 - jm1;
            jm1 = j0;
            j0 = jp1;
            out[n + 1] = jp1;
        }
        return;
    }
    // Miller backward recursion with rescaling
    const std::size_t M = nmax + 16 + static_cast<std::size_t>(theta);
    double fp1 = 0.0, f = 1e-30;
    for (std::size_t n = M; n-- > 0;) {
        const double fm1 = (2.0 * n + 3.0) / theta * f - fp1;
        fp1 = f;
        f = fm1;
        if (n <= nmax) out[n] = f;
        if (std::abs(f) > 1e250) {
            f *= 1e-250;
            fp1 *= 1e-250;
            for (std::size_t m = n; m <= nmax; ++m) out[m] *= 1e-250;
        }
    }
    // normalize against whichever of j0, j1 is better conditioned
    const double s = std::sin(theta), c = std::cos(theta);
    const double j0_true = s / theta;
    const double j1_true = s / (theta * theta) - c / theta;
    const double ratio = (std::abs(j0_true) >= std::abs(j1_true))
                             ? j0_true / out[0]
                             : (nmax >= 1 ? j1_true / out[1] : j0_true / out[0]);
    for (auto& v : out) v *= ratio;
}

}  // namespace detail

double thermal_occupation(double omega, double temperature_ratio_at_omega_m) {
    return bose_occupation(omega * temperature_ratio_at_omega_m);
}

double SpectralModel::occupation(double omega, const SystemParams& params) const {
    if (kind == Kind::Flat) return params.thermal_occupation_at(params.omega_m);
    return params.thermal_occupation_at(omega);
}

double eval_J(const SpectralModel& model, double omega) {
    switch (model.kind) {
        case SpectralModel::Kind::OhmicFamily: {
            if (omega <= 0.0) return 0.0;
            return model.eta * std::pow(model.omega0, 1.0 - model.s) *
                   std::pow(omega, model.s) * std::exp(-omega / model.omega0);
        }
        case SpectralModel::Kind::BandPowerLaw: {
            if (omega < model.band_min || omega > model.band_max) return 0.0;
            const double w_exp = model.c_fixed_at_omega_m ? 1.0 : omega;
            const double C = model.eta * std::exp(-w_exp / model.omega0) /
                             std::pow(model.omega0, model.k - 1.0);
            return C * std::pow(omega, model.k);
        }
        case SpectralModel::Kind::Flat:
            return model.gamma_m / (2.0 * kPi);
    }
    return 0.0;
}

QuadratureRule make_quadrature(const SpectralModel& model, std::size_t n_nodes) {
    QuadratureRule rule;
    switch (model.kind) {
        case SpectralModel::Kind::Flat: {
            // Half-residue spike at resonance: weight pi * J(omega_m) realizes
            // the Markov-limit damping identity pi J(omega_m) = gamma_m / 2.
            rule.delta_rule = true;
            rule.nodes = {1.0};
            rule.weights = {kPi};
            return rule;
        }
        case SpectralModel::Kind::OhmicFamily: {
            if (model.eta < 0.0 || !(model.omega0 > 0.0))
                throw std::invalid_argument("OhmicFamily requires eta >= 0 and omega0 > 0");
            if (n_nodes == 0) n_nodes = 512;
            const std::size_t p = 32;
            const std::size_t n_panels = std::max<std::size_t>(1, n_nodes / p);
            const double omega_cut = 40.0 * model.omega0;
            std::vector<double> x, w;
            gauss_legendre(p, x, w);
            // cubic grading towards omega = 0 keeps the omega^s branch point
            // resolved for sub-Ohmic exponents
            for (std::size_t i = 0; i < n_panels; ++i) {
                const double a = omega_cut * std::pow(static_cast<double>(i) / n_panels, 3.0);
                const double b =
                    omega_cut * std::pow(static_cast<double>(i + 1) / n_panels, 3.0);
                append_panel(rule, a, b, p, x, w);
            }
            return rule;
        }
        case SpectralModel::Kind::BandPowerLaw: {
            if (!(model.band_min > 0.0) || !(model.band_max > model.band_min))
                throw std::invalid_argument("BandPowerLaw requires 0 < band_min < band_max");
            if (n_nodes == 0) n_nodes = 256;
            const std::size_t p = 32;
            const std::size_t n_panels = std::max<std::size_t>(1, n_nodes / p);
            std::vector<double> x, w;
            gauss_legendre(p, x, w);
            const double width = (model.band_max - model.band_min) / n_panels;
            for (std::size_t i = 0; i < n_panels; ++i)
                append_panel(rule, model.band_min + i * width, model.band_min + (i + 1) * width,
                             p, x, w);
            return rule;
        }
    }
    throw std::invalid_argument("unknown spectral model");
}

QuadratureRule channel_rule(const SpectralModel& model, double horizon, double fine_halfwidth) {
    if (model.is_flat()) return make_quadrature(model);

    QuadratureRule rule;
    const std::size_t p = 24;
    std::vector<double> x, w;
    gauss_legendre(p, x, w);
    // a p-point panel keeps e^{i omega t} resolved while half_width*t <= ~p/2
    const double h_fine = std::min(fine_halfwidth, 0.5 * p / std::max(horizon, 1.0));

    double lo, hi;
    if (model.kind == SpectralModel::Kind::BandPowerLaw) {
        lo = model.band_min;
        hi = model.band_max;
    } else {
        lo = 0.0;
        hi = 40.0 * model.omega0;
    }

    const double fine_lo = std::max(lo, 1.0 - fine_halfwidth);
    const double fine_hi = std::min(hi, 1.0 + fine_halfwidth);

    auto fill = [&](double a, double b, double max_width) {
        if (b - a <= 0.0) return;
        const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                           std::ceil((b - a) / max_width)));
        const double width = (b - a) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            append_panel(rule, a + i * width, a + (i + 1) * width, p, x, w);
    };

    fill(lo, fine_lo, 2.0);
    fill(fine_lo, fine_hi, 2.0 * h_fine);
    // the off-resonant tail; contributions fall off with both J and detuning,
    // trim once J is negligible relative to the resonant region
    const double j_ref = std::max(eval_J(model, 1.0), eval_J(model, model.omega0));
    double a = fine_hi;
    while (a < hi) {
        const double b = std::min(hi, a + 2.0);
        fill(a, b, 2.0);
        a = b;
        if (eval_J(model, a) < 1e-14 * j_ref && a > 10.0 * model.omega0) break;
    }
    return rule;
}

cd oscillatory_integral(const QuadratureRule& rule, const std::vector<double>& g_at_nodes,
                        double t) {
    const FilonPlan plan = make_filon_plan(rule, g_at_nodes);
    std::vector<double> buf;
    return eval_filon_plan(plan, t, buf);
}

double plain_integral(const QuadratureRule& rule, const std::vector<double>& g_at_nodes) {
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) acc += rule.weights[j] * g_at_nodes[j];
    return acc;
}

cd memory_kernel_f(const SpectralModel& model, const QuadratureRule& quad, double t) {
    if (model.is_flat())
        throw std::invalid_argument(
            "memory_kernel_f: Flat spectrum has no kernel; Markovian mode uses local damping");
    const cd osc = oscillatory_integral(quad, sample_J(model, quad), t);
    return cd(0.0, 2.0 * osc.imag());
}

cd bath_correlation_C3(const SpectralModel& model, const QuadratureRule& quad,
                       double temperature_ratio, double tau) {
    std::vector<double> g_vac(quad.size()), g_th(quad.size());
    SystemParams p;
    p.temperature_ratio = temperature_ratio;
    for (std::size_t j = 0; j < quad.size(); ++j) {
        const double J = eval_J(model, quad.nodes[j]);
        const double N = model.occupation(quad.nodes[j], p);
        g_vac[j] = J * (N + 1.0);
        g_th[j] = J * N;
    }
    // C3(tau) = int J [(N+1) e^{-i w tau} + N e^{+i w tau}] dw
    return std::conj(oscillatory_integral(quad, g_vac, tau)) +
           oscillatory_integral(quad, g_th, tau);
}

std::vector<cd> tabulate_f(const SpectralModel& model, const QuadratureRule& quad,
                           const TimeGrid& grid) {
    if (model.is_flat())
        throw std::invalid_argument("tabulate_f: Flat spectrum has no kernel");
    const FilonPlan plan = make_filon_plan(quad, sample_J(model, quad));
    std::vector<cd> table(grid.size());
    std::vector<double> buf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cd osc = eval_filon_plan(plan, grid.t(i), buf);
        table[i] = cd(0.0, 2.0 * osc.imag());
    }
    return table;
}

std::vector<cd> tabulate_C3(const SpectralModel& model, const QuadratureRule& quad,
                            double temperature_ratio, const TimeGrid& grid) {
    std::vector<double> g_vac(quad.size()), g_th(quad.size());
    SystemParams p;
    p.temperature_ratio = temperature_ratio;
    for (std::size_t j = 0; j < quad.size(); ++j) {
        const double J = eval_J(model, quad.nodes[j]);
        const double N = model.occupation(quad.nodes[j], p);
        g_vac[j] = J * (N + 1.0);
        g_th[j] = J * N;
    }
    const FilonPlan plan_vac = make_filon_plan(quad, g_vac);
    const FilonPlan plan_th = make_filon_plan(quad, g_th);
    std::vector<cd> table(grid.size());
    std::vector<double> buf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double tau = grid.t(i);
        table[i] = std::conj(eval_filon_plan(plan_vac, tau, buf)) +
                   eval_filon_plan(plan_th, tau, buf);
    }
    return table;
}

double BathModes::coupling_weight() const {
    double acc = 0.0;
    for (double v : V) acc += v * v;
    return acc;
}

BathModes discretize_bath(const SpectralModel& model, std::size_t K,
                          std::pair<double, double> band) {
    if (K < 2) throw std::invalid_argument("discretize_bath: K >= 2 required");
    if (!(band.first >= 0.0) || !(band.second > band.first))
        throw std::invalid_argument("discretize_bath: invalid band");
    if (model.kind == SpectralModel::Kind::BandPowerLaw &&
        (band.first < model.band_min - 1e-12 || band.second > model.band_max + 1e-12))
        throw std::invalid_argument("discretize_bath: band outside the support of J");

    BathModes modes;
    modes.omega.resize(K);
    modes.V.resize(K);
    const double dw = (band.second - band.first) / static_cast<double>(K);
    for (std::size_t i = 0; i < K; ++i) {
        const double w = band.first + (static_cast<double>(i) + 0.5) * dw;
        modes.omega[i] = w;
        modes.V[i] = std::sqrt(eval_J(model, w) * dw);
    }
    return modes;
}

std::pair<double, double> default_oracle_band(const SpectralModel& model,
                                              const SystemParams& params) {
    const double wm = params.omega_m;
    switch (model.kind) {
        case SpectralModel::Kind::BandPowerLaw:
            return {model.band_min, model.band_max};
        case SpectralModel::Kind::Flat:
            // wide enough that the rate-equation onset error stays below 1%
            return {std::max(0.05 * wm, wm - 0.95), wm + 1.05};
        case SpectralModel::Kind::OhmicFamily:
        default:
            return {std::max(0.0, wm - 3.0), wm + 3.0};
    }
}

}  // namespace nmopt
