// gaussian.hpp: two-mode Gaussian states: covariance algebra, symplectic
// spectra, partial transpose, logarithmic negativity and the 50/50 beam
// splitter between real (x1, x2) and virtual (x+, x-) modes.
//
// Conventions: hbar = 1, quadrature ordering r = (x1, p1, x2, p2),
// V_ij = <{r_i, r_j}>/2 - <r_i><r_j>. The vacuum of a unit oscillator has
// V = diag(1/2, 1/2, 1/2, 1/2) and symplectic eigenvalues 1/2.

#pragma once

#include <utility>

#include <Eigen/Core>

namespace qbm {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kPhysicalityTol = 1e-9;

/// Block-diagonal symplectic form diag([[0,1],[-1,0]], [[0,1],[-1,0]]).
const Mat4& symplectic_form();

/// Mass and frequency of a single oscillator mode.
struct ModeSpec {
    double mass{1.0};
    double frequency{1.0};

    ModeSpec() = default;
    ModeSpec(double m, double w);
};

class GaussianState {
public:
    /// Vacuum of two unit oscillators.
    GaussianState();

    /// Symmetrizes `cov`; throws ValidationError when the input is asymmetric
    /// beyond 1e-12 (relative to its largest entry) or violates the
    /// uncertainty principle beyond 1e-9.
    GaussianState(const Vec4& mean, const Mat4& cov);
    explicit GaussianState(const Mat4& cov) : GaussianState(Vec4::Zero(), cov) {}

    const Vec4& mean() const noexcept { return mean_; }
    const Mat4& cov() const noexcept { return cov_; }

    /// (1/4 det V)^(-1/2), equal to 1 for pure states.
    double purity() const;

private:
    Vec4 mean_;
    Mat4 cov_;
};

/// Throws ValidationError if `v` is not symmetric within kSymmetryTol.
void require_symmetric(const Mat4& v);

/// Smallest eigenvalue of the Hermitian matrix V + (i/2) J.
double uncertainty_margin(const Mat4& v);

/// Symplectic eigenvalues (nu_minus <= nu_plus): moduli of the eigenvalues
/// of iJV, paired up.
std::pair<double, double> symplectic_eigenvalues(const Mat4& v);

/// P V P with P = diag(1, 1, 1, -1).
Mat4 partial_transpose(const Mat4& v);

/// max{0, -ln(2 nu_min)} of the partially transposed covariance. Values below
/// 1e-12 are eigensolver round-off on a pure separable state and return 0.
double log_negativity(const GaussianState& state);

/// -ln(2 nu_min) of the partial transpose, without clipping at zero. Negative
/// values measure how far a separable state is from the entanglement edge.
double log_negativity_unclipped(const Mat4& v);

/// Orthogonal symplectic map x± = (x1 ± x2)/√2, p± = (p1 ± p2)/√2. It is its
/// own inverse; the output ordering is (x+, p+, x-, p-).
const Mat4& beam_splitter_matrix();
GaussianState beam_splitter(const GaussianState& state);
Mat4 beam_splitter(const Mat4& cov);

/// 1/2 ln[m w dx/dp].
double mode_squeezing(double dx, double dp, const ModeSpec& mode);

// --- single-mode building blocks -------------------------------------------

/// Covariance of a single mode with dispersions dx, dp and no x-p correlation.
Mat2 diagonal_mode(double dx, double dp);

/// Dispersions (dx, dp) of a state squeezed by r relative to `mode`
/// (dx/dp = e^{2r}/(m w)) with symplectic area dx dp = area.
std::pair<double, double> squeezed_dispersions(double r, double area, const ModeSpec& mode);

/// Covariance assembled from two uncorrelated single-mode blocks.
Mat4 product_covariance(const Mat2& first, const Mat2& second);

/// Thermal covariance of an oscillator with occupation nbar.
Mat2 thermal_mode(double nbar, const ModeSpec& mode);

}  // namespace qbm
