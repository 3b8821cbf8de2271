#include <doctest.h>

#include <cmath>

#include "nmopt/classical.hpp"
#include "support/oracles.hpp"

using namespace nmopt;

TEST_SUITE_BEGIN("classical");

namespace {
SystemParams base_params() {
    SystemParams p;
    p.kappa = 0.05;
    p.g0 = 0.0;
    p.drive_E = 0.0;
    p.alpha0 = cd(100.0, 0.0);
    p.beta0 = cd(100.0, 0.0);
    return p;
}
}  // namespace

TEST_CASE("undriven cavity decays at kappa/2") {
    auto p = base_params();
    const TimeGrid grid{0.02, 500};  // t_end = 10
    const auto [traj, phase] = evolve_classical(p, {}, grid, {});
    const double expected = 100.0 * std::exp(-p.kappa * 10.0 / 2.0);
    CHECK(std::abs(traj.alpha.back()) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("driven cavity reaches the steady state E/(i delta_c + kappa/2)") {
    auto p = base_params();
    p.drive_E = 300.0;
    p.delta_c = 1.0;
    const TimeGrid grid{0.05, 12000};  // t_end = 600 >> 2/kappa
    ClassicalOptions opts;
    opts.drive_model = DriveModel::SelfConsistent;  // g0 = 0 so Delta' = delta_c
    const auto [traj, phase] = evolve_classical(p, {}, grid, {}, opts);
    const double mag_ss = 300.0 / std::sqrt(1.0 + 0.000625);
    CHECK(std::abs(traj.alpha.back()) == doctest::Approx(mag_ss).epsilon(1e-6));
}

TEST_CASE("free mechanical oscillator keeps |beta| constant") {
    auto p = base_params();
    p.beta0 = cd(70.0, 30.0);
    const TimeGrid grid{0.02, 2000};
    const auto [traj, phase] = evolve_classical(p, {}, grid, {});
    for (std::size_t i = 0; i < grid.size(); i += 399)
        CHECK(std::abs(traj.beta[i]) == doctest::Approx(std::abs(p.beta0)).epsilon(1e-12));
}

TEST_CASE("full mode matches the damped-driven closed form over [0, 100]") {
    auto p = base_params();
    p.drive_E = 120.0;
    p.delta_c = 0.7;
    p.alpha0 = cd(40.0, -5.0);
    const TimeGrid grid{0.02, 5000};
    ClassicalOptions opts;
    opts.drive_model = DriveModel::SelfConsistent;
    const auto [traj, phase] = evolve_classical(p, {}, grid, {}, opts);
    const cd lambda(p.kappa / 2.0, p.delta_c);
    const cd alpha_ss = p.drive_E / lambda;
    for (std::size_t i = 0; i < grid.size(); i += 500) {
        const cd ref = alpha_ss + (p.alpha0 - alpha_ss) * std::exp(-lambda * grid.t(i));
        CHECK(std::abs(traj.alpha[i] - ref) <= 1e-6 * std::abs(ref));
    }
}

TEST_CASE("G tracks g0 alpha and delta_eff stays locked") {
    auto p = base_params();
    p.g0 = 5e-5;
    p.drive_E = 300.0;
    const TimeGrid grid{0.02, 500};
    const auto [traj, phase] = evolve_classical(p, {}, grid, {});
    for (std::size_t i = 0; i < grid.size(); i += 97) {
        CHECK(traj.G[i] == p.g0 * traj.alpha[i]);
        CHECK(traj.delta_eff[i] == doctest::Approx(1.0));  // locked at omega_m
    }
}

TEST_CASE("sideband lock phase integral") {
    auto p = base_params();

    SUBCASE("constant kappa") {
        const TimeGrid grid{0.5, 20};  // t_end = 10
        const auto phase = sideband_lock(p, grid);
        CHECK(phase.U.front() == cd(0.0, 0.0));
        CHECK(phase.U.back().real() == doctest::Approx(0.025 * 10.0).epsilon(1e-12));
        CHECK(phase.U.back().imag() == doctest::Approx(10.0).epsilon(1e-12));
    }

    SUBCASE("Q-switch schedule") {
        Schedule sched;
        sched.kappa_steps = {{133.6, 10.0}};
        const TimeGrid grid{0.02, 10000};  // t_end = 200
        const auto phase = sideband_lock(p, grid, sched);
        CHECK(phase.U.back().real() ==
              doctest::Approx(0.025 * 133.6 + 5.0 * 66.4).epsilon(1e-12));
        for (std::size_t i = 1; i < phase.U.size(); i += 777)
            CHECK(phase.U[i].real() >= phase.U[i - 1].real());
    }
}

TEST_CASE("memory term pulls energy out of the oscillator") {
    // with an Ohmic bath and no drive, |beta| must decay rather than stay flat
    auto p = base_params();
    p.beta0 = cd(100.0, 0.0);
    SpectralModel m;
    m.kind = SpectralModel::Kind::OhmicFamily;
    m.eta = 1e-3;  // strengthened so the decay is visible over t <= 60
    m.s = 1.0;
    m.omega0 = 5.0;
    const TimeGrid grid{0.02, 3000};
    const auto f = tabulate_f(m, make_quadrature(m), grid);
    const auto [traj, phase] = evolve_classical(p, f, grid, {});
    CHECK(std::abs(traj.beta.back()) < 0.95 * std::abs(p.beta0));
}

TEST_CASE("second-order convergence of the coupled solve") {
    auto p = base_params();
    p.g0 = 5e-4;
    p.drive_E = 300.0;
    p.delta_c = 1.0;
    SpectralModel m;
    m.kind = SpectralModel::Kind::OhmicFamily;
    m.eta = 1e-4;
    m.s = 1.0;
    m.omega0 = 5.0;
    ClassicalOptions opts;
    opts.drive_model = DriveModel::SelfConsistent;

    auto run = [&](double dt, std::size_t steps) {
        const TimeGrid grid{dt, steps};
        const auto f = tabulate_f(m, make_quadrature(m), grid);
        return evolve_classical(p, f, grid, {}, opts).first;
    };
    const auto coarse = run(0.04, 500);
    const auto half = run(0.02, 1000);
    const auto ref = run(0.01, 2000);

    const double err_coarse = std::abs(coarse.beta.back() - ref.beta.back()) +
                              std::abs(coarse.alpha.back() - ref.alpha.back());
    const double err_half = std::abs(half.beta.back() - ref.beta.back()) +
                            std::abs(half.alpha.back() - ref.alpha.back());
    CHECK(err_coarse / err_half >= 3.5);
}

TEST_CASE("divergence guard trips on a blown-up configuration") {
    auto p = base_params();
    p.drive_E = 1e12;
    const TimeGrid grid{0.02, 2000};
    ClassicalOptions opts;
    opts.drive_model = DriveModel::SelfConsistent;
    CHECK_THROWS_AS((void)evolve_classical(p, {}, grid, {}, opts), DivergenceError);
}

TEST_SUITE_END();
