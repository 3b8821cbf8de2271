#pragma once

// Bath spectral densities, the memory kernel f(t), the stationary bath
// correlation C3(tau) and bath-mode discretization.
//
// Frequency integrals of the form int g(omega) exp(i*omega*t) domega are
// oscillatory for large t; a fixed Gauss-Legendre rule cannot track them.
// They are evaluated with a Filon-Legendre scheme instead: g is expanded in
// Legendre polynomials on each quadrature panel and the oscillatory moments
// int P_n(x) exp(i*theta*x) dx = 2 i^n j_n(theta) are computed from spherical
// Bessel functions. The accuracy is then set by how well polynomials capture
// g on a panel and is independent of t.

#include <cstddef>
#include <vector>

#include "nmopt/model.hpp"

namespace nmopt {

/// Bath spectral density J(omega).
struct SpectralModel {
    enum class Kind {
        OhmicFamily,   ///< J = eta * omega * (omega/omega0)^(s-1) * exp(-omega/omega0)
        BandPowerLaw,  ///< J = C(omega) * omega^k on [band_min, band_max], 0 outside
        Flat,          ///< Markovian limit, J = gamma_m / (2 pi)
    };

    Kind kind = Kind::OhmicFamily;
    double eta = 1e-5;     ///< system-bath coupling strength
    double s = 1.0;        ///< Ohmic exponent (sub-Ohmic < 1, Ohmic = 1, super-Ohmic > 1)
    double omega0 = 5.0;   ///< cutoff frequency
    double k = -2.0;       ///< band power-law exponent
    double band_min = 0.95;
    double band_max = 1.05;
    bool c_fixed_at_omega_m = false;  ///< freeze the C prefactor exponential at omega_m
    double gamma_m = 1e-8;            ///< Flat variant damping rate

    bool is_flat() const { return kind == Kind::Flat; }

    /// Thermal occupation used for this bath at frequency omega. Structured
    /// spectra use the Bose distribution; the Flat (Markovian-limit) variant
    /// holds the occupation at its resonant value n_th(omega_m).
    double occupation(double omega, const SystemParams& params) const;
};

/// J(omega) for omega >= 0.
double eval_J(const SpectralModel& model, double omega);

/// N_omega = 1/(exp(omega*ratio/omega_m) - 1), overflow-safe. omega_m = 1 here.
double thermal_occupation(double omega, double temperature_ratio_at_omega_m);

/// Frequency quadrature: plain nodes/weights plus the panel structure used by
/// the Filon transform. For the Flat variant the rule degenerates to the
/// single node (omega_m, pi): the half-residue that realizes the Markov-limit
/// identity int J(omega) e^{i(omega_m-omega)tau} domega = pi J(omega_m).
struct QuadratureRule {
    struct Panel {
        double center = 0.0;
        double half_width = 0.0;
        std::size_t first_node = 0;  ///< index into nodes/weights
        std::size_t order = 0;       ///< Gauss-Legendre points on this panel
    };

    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<Panel> panels;
    bool delta_rule = false;  ///< single-spike Flat representation

    std::size_t size() const { return nodes.size(); }
};

/// Build the kernel-table quadrature. Ohmic family: cubic-graded panels on
/// [0, 40*omega0] (default 512 nodes); BandPowerLaw: uniform panels on the
/// band (default 256); Flat: the delta rule.
QuadratureRule make_quadrature(const SpectralModel& model, std::size_t n_nodes = 0);

/// Occupancy-channel quadrature: fine panels around omega_m sized so the
/// e^{i(omega - omega_m) t} structure stays resolved for t <= horizon,
/// coarser panels across the rest of the support.
QuadratureRule channel_rule(const SpectralModel& model, double horizon,
                            double fine_halfwidth = 1.0);

/// Filon-Legendre transform int g(omega) e^{i omega t} domega with g sampled
/// on the rule's nodes. Valid for any real t, including negative.
cd oscillatory_integral(const QuadratureRule& rule, const std::vector<double>& g_at_nodes,
                        double t);

/// Plain quadrature sum of g over the rule.
double plain_integral(const QuadratureRule& rule, const std::vector<double>& g_at_nodes);

/// Memory kernel f(t) = 2i * int J(omega) sin(omega t) domega (purely
/// imaginary). The Flat variant has no kernel (Markovian mode replaces the
/// memory integral with local damping) and is refused.
cd memory_kernel_f(const SpectralModel& model, const QuadratureRule& quad, double t);

/// Stationary bath correlation
/// C3(tau) = int J(omega) { e^{-i omega tau} + 2 cos(omega tau) N_omega } domega,
/// so that f3(tau1, tau2) = C3(tau1 - tau2). Hermitian: C3(-tau) = conj C3(tau).
cd bath_correlation_C3(const SpectralModel& model, const QuadratureRule& quad,
                       double temperature_ratio, double tau);

/// Tabulations on a uniform grid (one Legendre-coefficient pass, then one
/// Bessel evaluation per time point).
std::vector<cd> tabulate_f(const SpectralModel& model, const QuadratureRule& quad,
                           const TimeGrid& grid);
std::vector<cd> tabulate_C3(const SpectralModel& model, const QuadratureRule& quad,
                            double temperature_ratio, const TimeGrid& grid);

/// Discretized bath modes omega_k with couplings V_k = sqrt(J(omega_k) dw).
struct BathModes {
    std::vector<double> omega;
    std::vector<double> V;

    std::size_t size() const { return omega.size(); }
    double coupling_weight() const;  ///< sum V_k^2
};

/// Midpoint-rule discretization of J over `band` into K modes.
BathModes discretize_bath(const SpectralModel& model, std::size_t K,
                          std::pair<double, double> band);

/// Default oracle band for a model: the band itself for BandPowerLaw, a wide
/// window around omega_m otherwise.
std::pair<double, double> default_oracle_band(const SpectralModel& model,
                                              const SystemParams& params);

namespace detail {
/// Spherical Bessel functions j_0..j_nmax at theta >= 0 (Miller backward
/// recursion below the stability boundary, forward above).
void spherical_bessel_jn(double theta, std::size_t nmax, std::vector<double>& out);
}  // namespace detail

}  // namespace nmopt
