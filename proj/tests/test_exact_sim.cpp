#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qbm/errors.hpp"
#include "qbm/exact_sim.hpp"
#include "qbm/normal_modes.hpp"
#include "qbm/phases.hpp"

using namespace qbm;
using Eigen::MatrixXd;

namespace {

FullModel position_model(double gamma0, double temperature, std::size_t n = 200, double c12 = 0.0,
                         double cutoff = 20.0) {
    return make_model({1.0, 1.0, c12, 0.0}, CouplingType::Position, Renormalization::Renormalized, gamma0, cutoff, n,
                      temperature);
}

FullModel symmetric_model(double gamma0, double temperature, std::size_t n = 200, double c12 = 0.0) {
    return make_model({1.0, 1.0, c12, c12}, CouplingType::Symmetric, Renormalization::Renormalized, gamma0, 20.0, n,
                      temperature);
}

// Hamiltonian form with the system block rotated to (x+, p+, x-, p-).
MatrixXd virtual_form(const MatrixXd& h) {
    MatrixXd t = MatrixXd::Identity(h.rows(), h.cols());
    t.topLeftCorner(4, 4) = beam_splitter_matrix();
    return t * h * t.transpose();
}

}  // namespace

TEST_CASE("generator structure") {
    SUBCASE("zero coupling is block diagonal with free oscillators") {
        const FullModel m = position_model(0.0, 0.0, 50, 0.3);
        const MatrixXd a = build_generator(m);
        CHECK(a.topRightCorner(4, a.cols() - 4).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.bottomLeftCorner(a.rows() - 4, 4).cwiseAbs().maxCoeff() == 0.0);
        // d x1/dt = p1/m, d p1/dt = -m w^2 x1 - m c12 x2
        CHECK(a(0, 1) == doctest::Approx(1.0));
        CHECK(a(1, 0) == doctest::Approx(-1.0));
        CHECK(a(1, 2) == doctest::Approx(-0.3));
    }
    SUBCASE("position coupling touches only x+") {
        const MatrixXd hv = virtual_form(hamiltonian_form(position_model(0.1, 0.0, 50)));
        const auto n = hv.cols() - 4;
        CHECK(hv.block(1, 4, 3, n).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(hv.block(0, 4, 1, n).cwiseAbs().maxCoeff() > 0.0);
        CHECK(hv(2, 0) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("symmetric coupling touches x+ and p+ only") {
        const MatrixXd hv = virtual_form(hamiltonian_form(symmetric_model(0.1, 0.0, 50)));
        const auto n = hv.cols() - 4;
        CHECK(hv.block(2, 4, 2, n).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(hv.block(1, 4, 1, n).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("Hamiltonian flow condition") {
        for (const auto& m : {position_model(0.1, 1.0, 80, -0.4), symmetric_model(0.1, 1.0, 80, 0.2)}) {
            const MatrixXd h = hamiltonian_form(m);
            CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
            const MatrixXd a = build_generator(m);
            const MatrixXd j = symplectic_form(a.rows() / 2);
            CHECK((a * j + j * a.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("model invariants") {
    FullModel m = position_model(0.1, 0.0, 20);
    m.system.c12_tilde = 0.1;
    CHECK_THROWS_AS(m.validate(), ValidationError);
    CHECK_THROWS_AS(make_model({1.0, 1.0, 0.2, 0.1}, CouplingType::Symmetric, Renormalization::Renormalized, 0.1,
                               20.0, 20, 0.0),
                    ValidationError);
    // renormalized position model: physical frequencies are the configured ones
    const auto f = position_model(0.1, 0.0, 400, -0.5).frequencies();
    CHECK(f.omega_r == doctest::Approx(1.0));
    CHECK(f.c12 == doctest::Approx(-0.5));
    CHECK(f.omega_plus == doctest::Approx(std::sqrt(0.5)));
    CHECK(f.omega_minus == doctest::Approx(std::sqrt(1.5)));
}

TEST_CASE("decoupled bath gives the free two-oscillator flow") {
    const FullModel m = position_model(0.0, 2.0, 300);
    const auto init = two_mode_squeezed(1.1, m.minus_mode());
    const auto times = uniform_grid(20.0, 0.05);
    for (const auto& s : entanglement_trajectory(m, init, times)) CHECK(std::abs(s.en - 2.2) < 1e-9);
}

TEST_CASE("initial states") {
    const FullModel m = position_model(0.1, 10.0, 100);
    for (double r : {0.5, 3.0}) {
        const auto en = entanglement_trajectory(m, two_mode_squeezed(r, m.minus_mode()), std::vector<double>{0.0});
        CHECK(en[0].en == doctest::Approx(2.0 * r).epsilon(1e-10));
    }
    const auto mixed = two_mode_squeezed(1.0, {}, 1.0);
    const Mat4 v = beam_splitter(mixed.cov());
    CHECK(v(0, 0) * v(1, 1) == doctest::Approx(0.25));  // x+ stays pure
    CHECK(std::sqrt(v(2, 2) * v(3, 3)) == doctest::Approx(1.0));
    CHECK(log_negativity(coherent_product({}, Vec4(1, 0, -1, 0))) == 0.0);
    CHECK(log_negativity(squeezed_product(2.0, {})) == 0.0);
}

TEST_CASE("symplectic and volume preservation") {
    const FullModel m = position_model(0.1, 3.0, 200, -0.3);
    const ExactSimulator sim(m);
    CHECK(sim.symplectic_residual(0.005) < 1e-10);
    CHECK(sim.symplectic_residual(25.0) < 1e-8);
    const auto init = two_mode_squeezed(1.5, m.minus_mode());
    CHECK(std::abs(sim.log_volume_drift(init, 30.0, 3.0)) < 1e-8);

    const ExactSimulator ssim(symmetric_model(0.1, 1.0, 150, 0.2));
    CHECK(ssim.symplectic_residual(0.005) < 1e-10);
}

TEST_CASE("reduced states stay physical and purity is bounded") {
    const FullModel m = position_model(0.1, 1.0, 200);
    const auto tr = evolve(m, two_mode_squeezed(2.0, m.minus_mode()), uniform_grid(30.0, 0.05));
    for (const auto& s : tr.states) {
        CHECK(uncertainty_margin(s.cov()) >= -1e-9);
        CHECK(s.purity() <= 1.0 + 1e-9);
    }
}

TEST_CASE("x- evolves as a free oscillator") {
    const FullModel m = position_model(0.1, 5.0, 200, -0.5);
    const auto w = m.frequencies().omega_minus;
    const auto init = squeezed_product(1.2, m.minus_mode(), 0.9);
    const Mat4 v0 = beam_splitter(init.cov());
    const auto times = uniform_grid(30.0, 0.7);
    const auto tr = evolve(m, init, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        Mat2 r;
        r << std::cos(w * t), std::sin(w * t) / w, -w * std::sin(w * t), std::cos(w * t);
        const Mat2 expect = r * v0.block<2, 2>(2, 2) * r.transpose();
        const Mat4 v = beam_splitter(tr.states[i].cov());
        CHECK((v.block<2, 2>(2, 2) - expect).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(v.block<2, 2>(0, 2).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("validity horizon") {
    const FullModel m = position_model(0.1, 0.0, 100);
    const ExactSimulator sim(m);
    const double h = m.bath.validity_horizon();
    CHECK(h == doctest::Approx(std::numbers::pi * 100 / 20.0));
    const std::vector<double> beyond{0.0, h + 1.0};
    CHECK_THROWS_AS(sim.evolve(GaussianState(), beyond), HorizonError);
    CHECK_NOTHROW(sim.evolve(GaussianState(), beyond, {.override_horizon = true, .temperature = std::nullopt}));
    const std::vector<double> unordered{1.0, 0.5};
    CHECK_THROWS_AS(sim.evolve(GaussianState(), unordered), ValidationError);
}

TEST_CASE("x+ cross-correlation decays") {
    const FullModel m = position_model(0.1, 1.0, 400);
    // x+ squeezed along a rotated axis so that <{x+, p+}> starts non-zero
    Mat2 block;
    block << 1.0, 0.8, 0.8, 1.0;
    const Mat4 v = beam_splitter(product_covariance(block, Mat2::Identity() * 0.5));
    const auto tr = evolve(m, GaussianState(v), std::vector<double>{0.0, 60.0});
    const double c0 = beam_splitter(tr.states[0].cov())(0, 1);
    const double c1 = beam_splitter(tr.states[1].cov())(0, 1);
    CHECK(std::abs(c1) < 1e-3 * std::abs(c0));
}

TEST_CASE("coherent input never entangles under symmetric coupling") {
    const FullModel m = symmetric_model(0.1, 2.0, 200);
    const auto en = entanglement_trajectory(m, coherent_product({}, Vec4(1.0, 0.5, 0.0, 0.0)), uniform_grid(30.0, 0.1));
    for (const auto& s : en) CHECK(s.en == 0.0);
}

TEST_CASE("equilibrium variances") {
    SUBCASE("symmetric coupling is balanced") {
        const FullModel m = symmetric_model(0.1, 2.0, 1000, 0.2);
        const auto f = m.frequencies();
        const auto eq = equilibrium_variances_sim(m);
        CHECK(std::abs(f.mass_plus * f.omega_plus * eq.dx_plus / eq.dp_plus - 1.0) < 1e-3);
    }
    SUBCASE("position coupling, high temperature equipartition") {
        const auto eq = equilibrium_variances_sim(position_model(0.1, 10.0, 400));
        CHECK(std::abs(eq.dp_plus * eq.dp_plus / 10.0 - 1.0) < 0.05);
    }
    SUBCASE("independent of the initial state") {
        const ExactSimulator sim(position_model(0.1, 1.0, 400));
        const auto a = equilibrium_variances_sim(sim);
        const auto b = equilibrium_variances_sim(sim, two_mode_squeezed(1.0, sim.model().minus_mode()));
        CHECK(std::abs(a.dx_plus / b.dx_plus - 1.0) < 1e-3);
        CHECK(std::abs(a.dp_plus / b.dp_plus - 1.0) < 1e-3);
    }
    CHECK_THROWS_AS(equilibrium_variances_sim(position_model(0.0, 1.0, 50)), ValidationError);
}

TEST_CASE("discretization convergence") {
    // E_N(t) at N and 2N modes below the smaller horizon
    const auto a = position_model(0.1, 2.0, 300, -0.3), b = position_model(0.1, 2.0, 600, -0.3);
    const auto times = uniform_grid(0.95 * a.bath.validity_horizon(), 0.5);
    const auto ea = entanglement_trajectory(a, two_mode_squeezed(1.5, a.minus_mode()), times);
    const auto eb = entanglement_trajectory(b, two_mode_squeezed(1.5, b.minus_mode()), times);
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(ea[i].en - eb[i].en) <= 1e-2 * ea[i].en + 1e-9);
}

TEST_CASE("late window and trajectory export") {
    const FullModel m = position_model(0.1, 1.0, 100);
    const ExactSimulator sim(m);
    const auto w = late_window(sim, two_mode_squeezed(1.0, m.minus_mode()), 10.0, 2.0, 21);
    CHECK(w.times.front() == doctest::Approx(8.0));
    CHECK(w.times.back() == doctest::Approx(10.0));
    CHECK(w.min <= w.mean);
    CHECK(w.mean <= w.max);
    CHECK_THROWS_AS(late_window(sim, GaussianState(), 1.0, 2.0, 10), ValidationError);

    const auto tr = sim.evolve(two_mode_squeezed(1.0, m.minus_mode()), uniform_grid(0.2, 0.1));
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    CHECK(header == "t,Exx11,Exp11,Exx12,Exp12,Epp11,Epx12,Epp12,Exx22,Exp22,Epp22,EN");
    std::getline(is, row);
    CHECK(row.rfind("0,", 0) == 0);
    CHECK(std::count(row.begin(), row.end(), ',') == 11);

    const auto g = uniform_grid(1.0, 0.25);
    REQUIRE(g.size() == 5);
    CHECK(g.back() == 1.0);
}
