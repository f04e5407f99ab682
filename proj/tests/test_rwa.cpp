#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qbm/errors.hpp"
#include "qbm/exact_sim.hpp"
#include "qbm/rwa.hpp"

using namespace qbm;

namespace {

DiscretizedBath ohmic(double gamma0, std::size_t n, double temperature) {
    return discretize(OhmicSpectralDensity(gamma0, 20.0), n, temperature, 1.0);
}

}  // namespace

TEST_CASE("free amplitude follows the sign convention") {
    const auto bath = ohmic(0.0, 20, 0.0);
    const auto times = uniform_grid(10.0, 0.0025);
    for (int sign : {1, -1}) {
        const auto sol = solve_amplitude(bath, 1.3, times, sign);
        for (std::size_t i = 0; i < times.size(); i += 97) {
            CHECK(std::abs(sol.u()[i] - std::polar(1.0, sign * 1.3 * times[i])) < 1e-12);
        }
        const auto trace = extract_coefficients(sol, bath);
        for (std::size_t i = 0; i < times.size(); ++i) {
            CHECK(trace.gamma[i] == 0.0);
            CHECK(trace.delta_omega2[i] == 0.0);
            CHECK(trace.diffusion[i] == 0.0);
        }
    }
}

TEST_CASE("single resonant mode gives Rabi oscillations") {
    // N = 1 on [0, 2]: one mode at w = 1, resonant with omega = 1
    const auto bath = discretize(OhmicSpectralDensity(0.3, 2.0), 1, 0.0, 1.0);
    const double g = bath.ladder_couplings[0];
    REQUIRE(bath.frequencies[0] == doctest::Approx(1.0));
    const auto times = uniform_grid(40.0, 0.02);
    const auto sol = solve_amplitude(bath, 1.0, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        CHECK(std::abs(std::abs(sol.u()[i]) - std::abs(std::cos(g * times[i]))) < 1e-10);
    }
}

TEST_CASE("amplitude solution agrees with direct Volterra stepping") {
    // trapezoidal stepping is second order: the gap must shrink 4x per halving of dt
    const auto bath = ohmic(0.1, 200, 0.0);
    const double t_end = 10.0;
    auto gap = [&](double dt) {
        const auto steps = static_cast<std::size_t>(std::lround(t_end / dt)) + 1;
        const auto ref = solve_volterra(bath, 1.0, dt, steps);
        const auto sol = solve_amplitude(bath, 1.0, ref.times);
        double worst = 0.0;
        const std::size_t stride = (steps - 1) / 20;
        for (std::size_t i = 0; i < steps; i += stride) {
            worst = std::max(worst, std::abs(sol.u()[i] - ref.u[i]));
            const Eigen::VectorXcd p_ref = ref.p.row(static_cast<Eigen::Index>(i)).transpose();
            worst = std::max(worst, (sol.p(ref.times[i]) - p_ref).cwiseAbs().maxCoeff());
        }
        return worst;
    };
    const double coarse = gap(0.0025), fine = gap(0.00125);
    CHECK(coarse < 1e-3);
    CHECK(fine < 1e-4);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("unitarity and commutator constraint") {
    const auto bath = ohmic(0.1, 300, 1.0);
    const auto sol = solve_amplitude(bath, 1.0, uniform_grid(30.0, 0.0025));
    CHECK(sol.unitarity_residual() < 1e-8);
    for (double t : {0.5, 7.0, 29.0}) CHECK(constraint_residual(sol, t) < 1e-8);
    CHECK(sol.u().front() == cdouble(1.0, 0.0));
    CHECK(sol.p(0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coefficients: zero temperature identity, sign independence, constancy") {
    const auto bath0 = ohmic(0.1, 400, 0.0);
    const double horizon = coefficient_horizon(bath0);
    const auto times = uniform_grid(horizon, 0.0025);
    const auto plus = extract_coefficients(solve_amplitude(bath0, 1.0, times, 1), bath0);
    const auto minus = extract_coefficients(solve_amplitude(bath0, 1.0, times, -1), bath0);
    double identity = 0.0, flip = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        identity = std::max(identity, std::abs(plus.diffusion[i] - plus.gamma[i]));
        flip = std::max({flip, std::abs(plus.gamma[i] - minus.gamma[i]), std::abs(plus.diffusion[i] - minus.diffusion[i])});
    }
    CHECK(identity < 1e-6);
    CHECK(flip < 1e-10);

    const auto asym = asymptotic_coefficients(plus);
    CHECK(asym.max_drift < 0.01);
    CHECK(asym.gamma > 0.0);
    CHECK(asym.diffusion == doctest::Approx(asym.gamma).epsilon(1e-6));

    std::ostringstream os;
    write_coefficients_csv(os, plus);
    CHECK(os.str().rfind("t,gamma,delta_omega2,diffusion\n0,", 0) == 0);
}

TEST_CASE("invalid grids are rejected") {
    const auto bath = ohmic(0.1, 50, 0.0);
    CHECK_THROWS_AS(solve_amplitude(bath, 1.0, uniform_grid(1.0, 0.01)), ValidationError);  // cutoff dt = 0.2
    CHECK_THROWS_AS(solve_amplitude(bath, 1.0, uniform_grid(1.0, 0.001, 0.5)), ValidationError);
    CHECK_THROWS_AS(solve_amplitude(bath, 1.0, uniform_grid(1.0, 0.001), 2), ValidationError);
}

TEST_CASE("moment equations") {
    SUBCASE("no coefficients: pure rotation, constant occupation") {
        CoefficientTrace t;
        t.times = uniform_grid(10.0, 0.01);
        t.gamma.assign(t.times.size(), 0.0);
        t.delta_omega2.assign(t.times.size(), 0.0);
        t.diffusion.assign(t.times.size(), 0.0);
        t.omega = 2.0;
        const auto m = evolve_moments_me(t, {0.5, 0.0}, 3.0);
        for (std::size_t i = 0; i < t.times.size(); ++i) {
            CHECK(std::abs(m.a[i] - 0.5 * std::polar(1.0, 2.0 * t.times[i])) < 1e-10);
            CHECK(m.sym[i] == 3.0);
        }
    }
    SUBCASE("constant coefficients approach the fixed point D / gamma") {
        CoefficientTrace t;
        t.times = uniform_grid(200.0, 0.01);
        t.gamma.assign(t.times.size(), 0.05);
        t.delta_omega2.assign(t.times.size(), 0.1);
        t.diffusion.assign(t.times.size(), 0.2);
        const auto m = evolve_moments_me(t, {1.0, 0.0}, 1.0);
        CHECK(m.sym.back() == doctest::Approx(0.2 / 0.05).epsilon(1e-6));
        CHECK(std::abs(m.a.back()) == doctest::Approx(std::exp(-2.0 * 0.05 * 200.0)).epsilon(1e-6));
    }
    SUBCASE("mismatched series are rejected") {
        CoefficientTrace t;
        t.times = {0.0, 1.0};
        t.gamma = {0.0};
        CHECK_THROWS_AS(evolve_moments_me(t, {1.0, 0.0}, 1.0), ValidationError);
    }
}

TEST_CASE("amplitude decay matches the exact symmetric-coupling simulation") {
    // <a>(t) of x+ from the full model vs u(t) a(0); a built with m omega0.
    const std::size_t n = 300;
    const FullModel model =
        make_model({1.0, 1.0, 0.0, 0.0}, CouplingType::Symmetric, Renormalization::Renormalized, 0.1, 20.0, n, 0.0);
    const auto times = uniform_grid(0.9 * model.bath.validity_horizon(), 0.0025);
    const auto sol = solve_amplitude(model.bath, model.frequencies().omega_plus, times);
    std::vector<double> sample;
    for (std::size_t i = 0; i < times.size(); i += 400) sample.push_back(times[i]);
    const double x0 = std::sqrt(2.0) * 1.5;  // x+ displaced by 1.5 (x1 = x2 = 1.5)
    const auto tr = evolve(model, coherent_product({}, Vec4(1.5, 0.0, 1.5, 0.0)), sample);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const Vec4 m = beam_splitter(tr.states[i]).mean();
        // printed sign convention: a = sqrt(m w / 2) (x - i p / (m w))
        const cdouble a(std::sqrt(0.5) * m(0), -std::sqrt(0.5) * m(1));
        const cdouble expect = sol.u()[i * 400] * (std::sqrt(0.5) * x0);
        CHECK(std::abs(std::abs(a) - std::abs(expect)) < 1e-3 * std::abs(expect));
    }
}
