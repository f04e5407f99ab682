#include "qbm/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "qbm/errors.hpp"

namespace qbm {

const Mat4& symplectic_form() {
    static const Mat4 j = [] {
        Mat4 m = Mat4::Zero();
        m(0, 1) = 1.0;
        m(1, 0) = -1.0;
        m(2, 3) = 1.0;
        m(3, 2) = -1.0;
        return m;
    }();
    return j;
}

ModeSpec::ModeSpec(double m, double w) : mass(m), frequency(w) {
    if (!(m > 0.0) || !(w > 0.0)) {
        throw ValidationError(fmt::format("ModeSpec requires mass > 0 and frequency > 0 (got {}, {})", m, w));
    }
}

void require_symmetric(const Mat4& v) {
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    const double asym = (v - v.transpose()).cwiseAbs().maxCoeff();
    if (!std::isfinite(asym) || asym > kSymmetryTol * scale) {
        throw ValidationError(fmt::format("covariance matrix is not symmetric (max |V - V^T| = {:.3e})", asym));
    }
}

double uncertainty_margin(const Mat4& v) {
    const std::complex<double> half_i(0.0, 0.5);
    const Eigen::Matrix4cd h = v.cast<std::complex<double>>() + half_i * symplectic_form().cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

GaussianState::GaussianState() : mean_(Vec4::Zero()), cov_(0.5 * Mat4::Identity()) {}

GaussianState::GaussianState(const Vec4& mean, const Mat4& cov) : mean_(mean) {
    require_symmetric(cov);
    if (!mean.allFinite()) throw ValidationError("mean vector is not finite");
    cov_ = 0.5 * (cov + cov.transpose());
    const double margin = uncertainty_margin(cov_);
    if (margin < -kPhysicalityTol) {
        throw ValidationError(fmt::format("covariance violates the uncertainty principle (min eig of V + iJ/2 = {:.3e})", margin));
    }
}

double GaussianState::purity() const {
    return 1.0 / std::sqrt(std::max(0.0, 16.0 * cov_.determinant()));
}

std::pair<double, double> symplectic_eigenvalues(const Mat4& v) {
    require_symmetric(v);
    const std::complex<double> i(0.0, 1.0);
    const Eigen::Matrix4cd m = i * (symplectic_form() * v).cast<std::complex<double>>();
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, false);
    std::array<double, 4> mod{};
    for (int k = 0; k < 4; ++k) mod[k] = std::abs(es.eigenvalues()[k]);
    std::sort(mod.begin(), mod.end());
    // Eigenvalues come in ± pairs, so sorted moduli pair up as (0,1), (2,3).
    return {0.5 * (mod[0] + mod[1]), 0.5 * (mod[2] + mod[3])};
}

Mat4 partial_transpose(const Mat4& v) {
    require_symmetric(v);
    Mat4 out = v;
    out.row(3) *= -1.0;
    out.col(3) *= -1.0;
    return out;
}

double log_negativity_unclipped(const Mat4& v) {
    const auto [nu_min, nu_max] = symplectic_eigenvalues(partial_transpose(v));
    (void)nu_max;
    return -std::log(2.0 * nu_min);
}

double log_negativity(const GaussianState& state) {
    const double e = log_negativity_unclipped(state.cov());
    return e > 1e-12 ? e : 0.0;
}

const Mat4& beam_splitter_matrix() {
    static const Mat4 s = [] {
        const double h = 1.0 / std::sqrt(2.0);
        Mat4 m;
        m << h, 0, h, 0,
             0, h, 0, h,
             h, 0, -h, 0,
             0, h, 0, -h;
        return m;
    }();
    return s;
}

Mat4 beam_splitter(const Mat4& cov) {
    const Mat4& s = beam_splitter_matrix();
    Mat4 out = s * cov * s.transpose();
    return 0.5 * (out + out.transpose());
}

GaussianState beam_splitter(const GaussianState& state) {
    return GaussianState(beam_splitter_matrix() * state.mean(), beam_splitter(state.cov()));
}

double mode_squeezing(double dx, double dp, const ModeSpec& mode) {
    if (!(dx > 0.0) || !(dp > 0.0)) {
        throw ValidationError(fmt::format("mode_squeezing requires positive dispersions (got {}, {})", dx, dp));
    }
    return 0.5 * std::log(mode.mass * mode.frequency * dx / dp);
}

Mat2 diagonal_mode(double dx, double dp) {
    Mat2 m;
    m << dx * dx, 0.0, 0.0, dp * dp;
    return m;
}

std::pair<double, double> squeezed_dispersions(double r, double area, const ModeSpec& mode) {
    if (!(area > 0.0)) throw ValidationError("symplectic area must be positive");
    const double mw = mode.mass * mode.frequency;
    // dx/dp = e^{2r}/(m w), dx dp = area
    const double dx = std::sqrt(area * std::exp(2.0 * r) / mw);
    return {dx, area / dx};
}

Mat4 product_covariance(const Mat2& first, const Mat2& second) {
    Mat4 v = Mat4::Zero();
    v.block<2, 2>(0, 0) = first;
    v.block<2, 2>(2, 2) = second;
    return v;
}

Mat2 thermal_mode(double nbar, const ModeSpec& mode) {
    const double s = nbar + 0.5;
    const double mw = mode.mass * mode.frequency;
    Mat2 m;
    m << s / mw, 0.0, 0.0, s * mw;
    return m;
}

}  // namespace qbm
