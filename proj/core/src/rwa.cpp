#include "qbm/rwa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"

namespace qbm {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

constexpr Index kBatch = 64;
constexpr double kUnitarityTol = 1e-8;

void check_sign(int sign) {
    if (sign != 1 && sign != -1) throw ValidationError(fmt::format("sign convention must be +1 or -1 (got {})", sign));
}

}  // namespace

AmplitudeSolution::AmplitudeSolution(const DiscretizedBath& bath, double omega, std::vector<double> times, int sign)
    : times_(std::move(times)), omega_(omega), sign_(sign) {
    check_sign(sign);
    if (!(omega > 0.0)) throw ValidationError("system frequency must be positive");
    const Index n = static_cast<Index>(bath.size());
    g_ = Eigen::Map<const VectorXd>(bath.ladder_couplings.data(), n);
    MatrixXd h = MatrixXd::Zero(n + 1, n + 1);
    h(0, 0) = omega;
    for (Index k = 0; k < n; ++k) {
        h(k + 1, k + 1) = bath.frequencies[static_cast<std::size_t>(k)];
        h(0, k + 1) = h(k + 1, 0) = -sign * g_(k);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
    lambda_ = es.eigenvalues();
    vecs_ = es.eigenvectors();

    u_.reserve(times_.size());
    MatrixXcd ur, fr;
    for (std::size_t start = 0; start < times_.size(); start += kBatch) {
        const std::size_t nb = std::min<std::size_t>(kBatch, times_.size() - start);
        rows(std::span<const double>(times_).subspan(start, nb), ur, fr);
        for (Index b = 0; b < static_cast<Index>(nb); ++b) {
            u_.push_back(ur(b, 0));
            unitarity_ = std::max(unitarity_, std::abs(ur.row(b).squaredNorm() - 1.0));
        }
    }
}

void AmplitudeSolution::rows(std::span<const double> times, MatrixXcd& u_rows, MatrixXcd& f_rows) const {
    const Index nb = static_cast<Index>(times.size());
    const Index dim = lambda_.size();
    // rows of exp(i s L t) applied to V^T: coefficients V_0j e_j and (V^T g)_j e_j
    const VectorXd v0 = vecs_.row(0).transpose();
    const VectorXd vg = vecs_.bottomRows(dim - 1).transpose() * g_;
    MatrixXd coef(4 * nb, dim);
    for (Index b = 0; b < nb; ++b) {
        for (Index j = 0; j < dim; ++j) {
            const double ph = sign_ * lambda_(j) * times[static_cast<std::size_t>(b)];
            const double c = std::cos(ph), s = std::sin(ph);
            coef(b, j) = v0(j) * c;
            coef(nb + b, j) = v0(j) * s;
            coef(2 * nb + b, j) = vg(j) * c;
            coef(3 * nb + b, j) = vg(j) * s;
        }
    }
    MatrixXd out(4 * nb, dim);
    out.noalias() = coef * vecs_.transpose();
    u_rows.resize(nb, dim);
    f_rows.resize(nb, dim);
    u_rows.real() = out.topRows(nb);
    u_rows.imag() = out.middleRows(nb, nb);
    f_rows.real() = out.middleRows(2 * nb, nb);
    f_rows.imag() = out.bottomRows(nb);
    for (Index b = 0; b < nb; ++b) {
        if (times[static_cast<std::size_t>(b)] != 0.0) continue;
        // exact initial condition instead of V V^T round-off
        u_rows.row(b).setZero();
        u_rows(b, 0) = 1.0;
        f_rows(b, 0) = 0.0;
        f_rows.row(b).tail(dim - 1) = g_.cast<cdouble>().transpose();
    }
}

VectorXcd AmplitudeSolution::p(double t) const {
    MatrixXcd ur, fr;
    const double ts[] = {t};
    rows(ts, ur, fr);
    return ur.row(0).tail(ur.cols() - 1).transpose();
}

VectorXcd AmplitudeSolution::d(double t) const {
    MatrixXcd ur, fr;
    const double ts[] = {t};
    rows(ts, ur, fr);
    return ur.row(0).tail(ur.cols() - 1).transpose() / ur(0, 0);
}

MatrixXcd AmplitudeSolution::propagator(double t) const {
    VectorXcd e(lambda_.size());
    for (Index j = 0; j < e.size(); ++j) e(j) = std::polar(1.0, sign_ * lambda_(j) * t);
    const MatrixXcd v = vecs_.cast<cdouble>();
    return v * e.asDiagonal() * v.transpose();
}

AmplitudeSolution solve_amplitude(const DiscretizedBath& bath, double omega, std::span<const double> times, int sign) {
    if (times.empty() || times.front() != 0.0) throw ValidationError("amplitude grid must start at t = 0");
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double dt = times[i] - times[i - 1];
        if (!(dt > 0.0)) throw ValidationError("amplitude grid must be strictly increasing");
        if (dt * bath.density.cutoff > 0.05 * (1.0 + 1e-9)) {
            throw ValidationError(fmt::format("amplitude grid step {:.4g} violates cutoff * dt <= 0.05", dt));
        }
    }
    return AmplitudeSolution(bath, omega, std::vector<double>(times.begin(), times.end()), sign);
}

VolterraSolution solve_volterra(const DiscretizedBath& bath, double omega, double dt, std::size_t steps, int sign) {
    check_sign(sign);
    if (!(dt > 0.0) || steps < 2) throw ValidationError("Volterra stepping needs dt > 0 and at least two steps");
    const std::size_t n = bath.size();
    const cdouble i1(0.0, 1.0);
    const double s = sign;

    std::vector<cdouble> eta(steps, 0.0);
    for (std::size_t j = 0; j < steps; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const double g = bath.ladder_couplings[k];
            eta[j] += g * g * std::polar(1.0, s * bath.frequencies[k] * dt * static_cast<double>(j));
        }
    }

    VolterraSolution out;
    out.times.resize(steps);
    out.u.assign(steps, 0.0);
    out.p = MatrixXcd::Zero(static_cast<Index>(steps), static_cast<Index>(n));
    out.u[0] = 1.0;
    const cdouble rot = i1 * s * omega;
    cdouble f = rot;  // f_0 = i s omega u_0 - I_0, I_0 = 0
    const cdouble denom = 1.0 - 0.5 * dt * rot + 0.25 * dt * dt * eta[0];
    for (std::size_t m = 0; m + 1 < steps; ++m) {
        // memory integral at t_{m+1} without its u_{m+1} endpoint
        cdouble known = 0.5 * eta[m + 1] * out.u[0];
        for (std::size_t j = 1; j <= m; ++j) known += eta[m + 1 - j] * out.u[j];
        known *= dt;
        const cdouble next = (out.u[m] + 0.5 * dt * (f - known)) / denom;
        out.u[m + 1] = next;
        f = rot * next - known - 0.5 * dt * eta[0] * next;
    }
    for (std::size_t m = 0; m < steps; ++m) out.times[m] = dt * static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) {
        const cdouble ph = std::polar(1.0, s * bath.frequencies[k] * dt);
        const cdouble drive = -i1 * bath.ladder_couplings[k] * 0.5 * dt;
        for (std::size_t m = 0; m + 1 < steps; ++m) {
            out.p(static_cast<Index>(m + 1), static_cast<Index>(k)) =
                ph * out.p(static_cast<Index>(m), static_cast<Index>(k)) + drive * (ph * out.u[m] + out.u[m + 1]);
        }
    }
    return out;
}

double constraint_residual(const AmplitudeSolution& sol, double t) {
    const MatrixXcd u = sol.propagator(t);
    const Index n = u.rows() - 1;
    const cdouble u00 = u(0, 0);
    const VectorXcd p = u.row(0).tail(n).transpose();
    const VectorXcd d = u.col(0).tail(n) / u00;
    const MatrixXcd q = u.bottomRightCorner(n, n) - d * p.transpose();
    return (d + q * p.conjugate()).cwiseAbs().maxCoeff();
}

CoefficientTrace extract_coefficients(const AmplitudeSolution& sol, const DiscretizedBath& bath) {
    if (sol.size() != bath.size()) throw ValidationError("amplitude solution and bath differ in size");
    if (sol.unitarity_residual() > kUnitarityTol) {
        throw ValidationError(fmt::format("amplitude solution breaks unitarity ({:.3e})", sol.unitarity_residual()));
    }
    const Index n = static_cast<Index>(bath.size());
    const auto occ = bath.occupations();
    VectorXd weight(n);
    VectorXd g(n);
    for (Index k = 0; k < n; ++k) {
        weight(k) = 2.0 * occ[static_cast<std::size_t>(k)] + 1.0;
        g(k) = bath.ladder_couplings[static_cast<std::size_t>(k)];
    }

    CoefficientTrace tr;
    tr.times = sol.times();
    tr.omega = sol.omega();
    tr.sign = sol.sign();
    const std::size_t steps = tr.times.size();
    tr.gamma.resize(steps);
    tr.delta_omega2.resize(steps);
    tr.diffusion.resize(steps);
    MatrixXcd ur, fr;
    for (std::size_t start = 0; start < steps; start += kBatch) {
        const std::size_t nb = std::min<std::size_t>(kBatch, steps - start);
        sol.rows(std::span<const double>(tr.times).subspan(start, nb), ur, fr);
        for (Index b = 0; b < static_cast<Index>(nb); ++b) {
            const cdouble u = ur(b, 0);
            const VectorXcd p = ur.row(b).tail(n).transpose();
            const cdouble sgd = g.cast<cdouble>().dot(p) / u;  // sum g_k d_k
            const VectorXcd gq = fr.row(b).tail(n).transpose() - sgd * p;
            double diff = 0.0;
            for (Index l = 0; l < n; ++l) diff += weight(l) * (gq(l) * std::conj(p(l))).imag();
            const std::size_t i = start + static_cast<std::size_t>(b);
            tr.gamma[i] = -0.5 * sgd.imag();
            tr.delta_omega2[i] = sgd.real();
            tr.diffusion[i] = 0.5 * diff;
        }
    }
    for (std::size_t i = 0; i < steps; ++i) {
        if (!std::isfinite(tr.gamma[i]) || !std::isfinite(tr.delta_omega2[i]) || !std::isfinite(tr.diffusion[i])) {
            throw NumericalError(fmt::format("non-finite coefficient at t = {:.6g}", tr.times[i]));
        }
    }
    return tr;
}

namespace {

// Hann-weighted mean of series[i] for t in [lo, hi]
double hann_mean(const std::vector<double>& t, const std::vector<double>& series, double lo, double hi) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi) continue;
        const double x = std::sin(std::numbers::pi * (t[i] - lo) / (hi - lo));
        num += x * x * series[i];
        den += x * x;
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace

AsymptoticCoefficients asymptotic_coefficients(const CoefficientTrace& trace, double tolerance) {
    if (trace.times.size() < 64) throw ValidationError("coefficient trace too short for an asymptotic estimate");
    const double t_end = trace.times.back();
    const double t0 = trace.times.front() + 0.75 * (t_end - trace.times.front());
    const double tm = 0.5 * (t0 + t_end);
    AsymptoticCoefficients out;
    auto analyse = [&](const std::vector<double>& series, double& mean) {
        mean = hann_mean(trace.times, series, t0, t_end);
        const double a = hann_mean(trace.times, series, t0, tm);
        const double b = hann_mean(trace.times, series, tm, t_end);
        const double scale = std::max(std::abs(mean), 1e-300);
        const double drift = (a == b) ? 0.0 : std::abs(b - a) / scale;
        out.max_drift = std::max(out.max_drift, drift);
    };
    analyse(trace.gamma, out.gamma);
    analyse(trace.delta_omega2, out.delta_omega2);
    analyse(trace.diffusion, out.diffusion);
    if (out.max_drift > tolerance) {
        throw ValidationError(fmt::format("coefficients are not asymptotically constant (drift {:.3e} > {:.3e})",
                                          out.max_drift, tolerance));
    }
    return out;
}

MomentSeries evolve_moments_me(const CoefficientTrace& trace, cdouble a0, double sym0) {
    const std::size_t n = trace.times.size();
    if (n == 0 || trace.gamma.size() != n || trace.delta_omega2.size() != n || trace.diffusion.size() != n) {
        throw ValidationError("coefficient series do not match the time grid");
    }
    MomentSeries out;
    out.times = trace.times;
    out.a.resize(n);
    out.sym.resize(n);
    out.a[0] = a0;
    out.sym[0] = sym0;
    const double s = trace.sign;
    auto rate = [&](std::size_t i) {
        return cdouble(-2.0 * trace.gamma[i], s * trace.omega - trace.delta_omega2[i]);
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double dt = trace.times[i + 1] - trace.times[i];
        if (!(dt > 0.0)) throw ValidationError("coefficient grid must be strictly increasing");
        out.a[i + 1] = out.a[i] * std::exp(0.5 * dt * (rate(i) + rate(i + 1)));
        const double decay = std::exp(-2.0 * dt * (trace.gamma[i] + trace.gamma[i + 1]));
        out.sym[i + 1] = decay * out.sym[i] + 2.0 * dt * (decay * trace.diffusion[i] + trace.diffusion[i + 1]);
    }
    return out;
}

double coefficient_horizon(const DiscretizedBath& bath, double settle) {
    const double h = bath.validity_horizon();
    const double g = bath.density.gamma0;
    return g > 0.0 ? std::min(h, settle / g) : h;
}

void write_coefficients_csv(std::ostream& os, const CoefficientTrace& trace) {
    os << "t,gamma,delta_omega2,diffusion\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        os << format_number(trace.times[i]) << ',' << format_number(trace.gamma[i]) << ','
           << format_number(trace.delta_omega2[i]) << ',' << format_number(trace.diffusion[i]) << '\n';
    }
}

}  // namespace qbm
