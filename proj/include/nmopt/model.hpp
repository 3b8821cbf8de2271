#pragma once

// Shared parameter, grid and schedule types. All rates and frequencies are
// expressed in units of the mechanical frequency omega_m, times in 1/omega_m,
// with hbar = 1. Everything here is immutable after validation and safe to
// share across threads.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nmopt {

using cd = std::complex<double>;

/// Physical rates and initial occupations of the optomechanical system.
struct SystemParams {
    double omega_m = 1.0;            ///< mechanical frequency (the unit scale)
    double delta_c = 1.0;            ///< bare cavity detuning omega_c - omega_d
    double kappa = 0.05;             ///< cavity decay rate
    double g0 = 5e-5;                ///< single-photon optomechanical coupling
    double drive_E = 300.0;          ///< cavity driving strength
    double m0 = 100.0;               ///< initial mechanical occupation
    double n0 = 0.0;                 ///< initial cavity occupation
    double temperature_ratio = 9.950330853155723e-3;  ///< hbar*omega_m/(kB*T)
    cd alpha0{100.0, 0.0};           ///< initial classical cavity amplitude
    cd beta0{100.0, 0.0};            ///< initial classical mechanical amplitude
    double gamma_m = 1e-8;           ///< Markovian-baseline mechanical decay

    /// Occupation of a Bose mode at frequency omega for this temperature.
    double thermal_occupation_at(double omega) const;
};

/// Uniform time grid t_i = i*dt, i = 0..n_steps.
struct TimeGrid {
    double dt = 0.02;
    std::size_t n_steps = 10000;

    std::size_t size() const { return n_steps + 1; }
    double t(std::size_t i) const { return static_cast<double>(i) * dt; }
    double t_end() const { return t(n_steps); }
};

/// Piecewise-constant control schedule for kappa and the drive E.
/// A value holds from its switch time (inclusive) until the next switch;
/// before the first switch the SystemParams base value applies.
struct Schedule {
    std::vector<std::pair<double, double>> kappa_steps;
    std::vector<std::pair<double, double>> drive_steps;

    bool empty() const { return kappa_steps.empty() && drive_steps.empty(); }
};

/// Right-continuous lookup of (kappa(t), E(t)).
std::pair<double, double> value_at(const Schedule& sched, const SystemParams& params, double t);

/// Exact integral of kappa(tau) over [0, t] for the piecewise-constant schedule.
double kappa_integral(const Schedule& sched, const SystemParams& params, double t);

/// Outcome of configuration validation: empty `errors` means usable.
struct Validated {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/// Check parameters, grid and schedule for consistency. When
/// `thermal_equilibrium` is set, m0 must equal the Bose occupation at omega_m
/// for the given temperature_ratio within 1e-9 relative. A linearization
/// warning is issued when |alpha0| < 10 or the predicted steady amplitude
/// E/sqrt(omega_m^2 + kappa^2/4) < 10.
Validated validate(const SystemParams& params, const TimeGrid& grid,
                   const Schedule& sched = {}, bool thermal_equilibrium = false);

/// Occupation 1/(exp(x)-1) from the Boltzmann exponent x = omega*ratio/omega_m.
/// Overflow-safe: returns 0 once the exponent exceeds ~700.
double bose_occupation(double exponent);

/// Thrown by the integrators when a divergence guard trips. `guard` names
/// the tripped check (classical, propagator, moments, phase_overflow).
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::string guard, const std::string& what)
        : std::runtime_error(what), guard_(std::move(guard)) {}
    const std::string& guard() const { return guard_; }

private:
    std::string guard_;
};

}  // namespace nmopt
