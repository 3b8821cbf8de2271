#include "nmopt/model.hpp"

#include <algorithm>
#include <cmath>

namespace nmopt {

double bose_occupation(double exponent) {
    if (exponent > 700.0) return 0.0;
    return 1.0 / std::expm1(exponent);
}

double SystemParams::thermal_occupation_at(double omega) const {
    return bose_occupation(omega * temperature_ratio / omega_m);
}

std::pair<double, double> value_at(const Schedule& sched, const SystemParams& params, double t) {
    auto lookup = [t](const std::vector<std::pair<double, double>>& steps, double base) {
        double v = base;
        for (const auto& [ts, val] : steps) {
            if (t >= ts)
                v = val;
            else
                break;
        }
        return v;
    };
    return {lookup(sched.kappa_steps, params.kappa), lookup(sched.drive_steps, params.drive_E)};
}

double kappa_integral(const Schedule& sched, const SystemParams& params, double t) {
    double acc = 0.0;
    double seg_start = 0.0;
    double seg_kappa = params.kappa;
    for (const auto& [ts, val] : sched.kappa_steps) {
        if (ts >= t) break;
        acc += seg_kappa * (ts - seg_start);
        seg_start = ts;
        seg_kappa = val;
    }
    acc += seg_kappa * (t - seg_start);
    return acc;
}

namespace {

bool strictly_increasing(const std::vector<std::pair<double, double>>& steps) {
    for (std::size_t i = 1; i < steps.size(); ++i)
        if (steps[i].first <= steps[i - 1].first) return false;
    return true;
}

bool nonnegative_values(const std::vector<std::pair<double, double>>& steps) {
    return std::all_of(steps.begin(), steps.end(),
                       [](const auto& s) { return s.second >= 0.0 && s.first >= 0.0; });
}

}  // namespace

Validated validate(const SystemParams& params, const TimeGrid& grid, const Schedule& sched,
                   bool thermal_equilibrium) {
    Validated v;
    auto err = [&v](const std::string& m) { v.errors.push_back(m); };
    auto warn = [&v](const std::string& m) { v.warnings.push_back(m); };

    if (!(grid.dt > 0.0)) err("degenerate grid: dt must be positive");
    if (grid.n_steps == 0) err("degenerate grid: n_steps must be positive");
    if (!(params.omega_m > 0.0)) err("omega_m must be positive");
    if (!(params.kappa > 0.0)) err("kappa must be positive");
    if (params.g0 < 0.0) err("g0 must be nonnegative");
    if (params.m0 < 0.0) err("m0 must be nonnegative");
    if (params.n0 < 0.0) err("n0 must be nonnegative");
    if (!(params.temperature_ratio > 0.0)) err("temperature_ratio must be positive");
    if (params.gamma_m < 0.0) err("gamma_m must be nonnegative");

    if (!strictly_increasing(sched.kappa_steps) || !strictly_increasing(sched.drive_steps))
        err("schedule switch times must be strictly increasing");
    if (!nonnegative_values(sched.kappa_steps) || !nonnegative_values(sched.drive_steps))
        err("schedule times and values must be nonnegative");

    if (thermal_equilibrium && params.temperature_ratio > 0.0) {
        const double m_eq = bose_occupation(params.temperature_ratio);
        const double scale = std::max(std::abs(m_eq), 1e-300);
        if (std::abs(params.m0 - m_eq) > 1e-9 * scale)
            err("thermal-equilibrium initialization inconsistent: m0 = " +
                std::to_string(params.m0) + " but 1/(exp(temperature_ratio)-1) = " +
                std::to_string(m_eq));
    }

    if (v.ok()) {
        // Linearization quality: the displaced amplitudes must stay large.
        const double alpha_ss =
            params.drive_E /
            std::hypot(params.omega_m, params.kappa / 2.0);  // sideband-locked detuning
        if (std::abs(params.alpha0) < 10.0)
            warn("linearization: |alpha0| < 10, classical displacement may be too small");
        if (alpha_ss < 10.0)
            warn("linearization: predicted steady |alpha| = " + std::to_string(alpha_ss) +
                 " < 10");
    }
    return v;
}

}  // namespace nmopt
