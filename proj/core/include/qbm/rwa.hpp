// rwa.hpp: amplitude equations of the number-conserving (symmetric) model
//   H = omega a^dagger a + sum_k w_k b_k^dagger b_k + sum_k g_k (a b_k^dagger + a^dagger b_k)
// and the exact time-dependent master-equation coefficients built from them.
//
// Heisenberg solutions: a(t) = u a(0) + sum_n p_n b_n(0) and
// b_k(t) = d_k a(t) + sum_n q_kn b_n(0). `sign` = +1 follows the printed
// convention da/dt = +i omega a (free u = e^{+i omega t}); -1 is the standard
// one. The two are complex conjugates of each other up to b_k -> -b_k, so
// |u|, gamma, delta_omega2 and diffusion do not depend on it.

#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qbm/bath.hpp"

namespace qbm {

using cdouble = std::complex<double>;

/// Exact solution via the one-particle matrix h = [[omega, -sign g^T], [-sign g, diag w]]
/// and U(t) = exp(i sign h t); coefficients are evaluated on demand, so the
/// N x N table q_kn is never stored.
class AmplitudeSolution {
public:
    AmplitudeSolution(const DiscretizedBath& bath, double omega, std::vector<double> times, int sign = 1);

    const std::vector<double>& times() const noexcept { return times_; }
    /// u on the grid.
    const std::vector<cdouble>& u() const noexcept { return u_; }
    /// max over the grid of | |u|^2 + sum |p_n|^2 - 1 |.
    double unitarity_residual() const noexcept { return unitarity_; }
    double omega() const noexcept { return omega_; }
    int sign() const noexcept { return sign_; }
    std::size_t size() const noexcept { return g_.size(); }

    /// p_n(t) for n = 1..N.
    Eigen::VectorXcd p(double t) const;
    /// d_k(t) = p_k(t) / u(t).
    Eigen::VectorXcd d(double t) const;
    /// Dense (N+1) x (N+1) propagator of (a, b_1, ..., b_N); index 0 is a.
    Eigen::MatrixXcd propagator(double t) const;

    /// Batched row evaluation used by extract_coefficients: for each time,
    /// row 0 of U (u, p_1..p_N) and the vector F_l = sum_k g_k U_kl.
    void rows(std::span<const double> times, Eigen::MatrixXcd& u_rows, Eigen::MatrixXcd& f_rows) const;

private:
    std::vector<double> times_;
    std::vector<cdouble> u_;
    double unitarity_{0.0};
    double omega_;
    int sign_;
    Eigen::VectorXd g_;
    Eigen::VectorXd lambda_;
    Eigen::MatrixXd vecs_;
};

/// Checks the grid (strictly increasing, starting at 0, cutoff * dt <= 0.05)
/// and builds the solution. Throws ValidationError on a bad grid or sign.
AmplitudeSolution solve_amplitude(const DiscretizedBath& bath, double omega, std::span<const double> times,
                                  int sign = 1);

/// Independent reference: direct time stepping of the Volterra equation
///   du/dt = i sign omega u - int_0^t eta(t - s) u(s) ds,  eta(t) = sum g_k^2 e^{i sign w_k t}
/// with trapezoidal memory and Crank-Nicolson, plus
///   dp_k/dt = i sign w_k p_k - i g_k u.  Cost O(steps^2 + steps N).
struct VolterraSolution {
    std::vector<double> times;
    std::vector<cdouble> u;
    Eigen::MatrixXcd p;  // steps x N
};
VolterraSolution solve_volterra(const DiscretizedBath& bath, double omega, double dt, std::size_t steps,
                                int sign = 1);

/// max_k |d_k + sum_n q_kn p_n^*| at time t, from the dense propagator.
double constraint_residual(const AmplitudeSolution& sol, double t);

struct CoefficientTrace {
    std::vector<double> times;
    std::vector<double> gamma;          // gamma~(t)
    std::vector<double> delta_omega2;   // delta Omega~^2(t) / omega^2 as printed (a frequency shift)
    std::vector<double> diffusion;      // D~(t) / (m omega)
    double omega{1.0};
    int sign{1};
};

/// gamma = -1/2 Im sum g_k d_k, delta_omega2 = Re sum g_k d_k,
/// diffusion = 1/2 sum_l (2 n_l + 1) Im(sum_k g_k q_kl p_l^*).
/// Throws ValidationError when the solution breaks unitarity beyond 1e-8.
CoefficientTrace extract_coefficients(const AmplitudeSolution& sol, const DiscretizedBath& bath);

struct AsymptoticCoefficients {
    double gamma{0.0};
    double delta_omega2{0.0};
    double diffusion{0.0};
    double max_drift{0.0};  // largest relative drift over the final quarter
};

/// Hann-windowed means over the final quarter of the trace. The drift of a
/// coefficient is the change of its windowed mean between the two halves of
/// that quarter, relative to the mean; the window suppresses the ripple that
/// the sharp cutoff imprints at frequency ~ cutoff. Throws ValidationError if
/// any drift exceeds `tolerance`.
AsymptoticCoefficients asymptotic_coefficients(const CoefficientTrace& trace, double tolerance = 0.01);

struct MomentSeries {
    std::vector<double> times;
    std::vector<cdouble> a;   // <a>
    std::vector<double> sym;  // <a a^dagger + a^dagger a>
};

/// d<a>/dt = (-2 gamma + i (sign omega - delta_omega2)) <a>,
/// dX/dt = -4 gamma X + 4 diffusion, integrated with a trapezoidal
/// integrating factor on the trace grid.
MomentSeries evolve_moments_me(const CoefficientTrace& trace, cdouble a0, double sym0);

/// Coefficient grid horizon: min(T_rec/2, settle / gamma0); past a few decay
/// times the band-edge tail of the discrete bath dominates the drift check.
double coefficient_horizon(const DiscretizedBath& bath, double settle = 8.0);

void write_coefficients_csv(std::ostream& os, const CoefficientTrace& trace);

}  // namespace qbm
