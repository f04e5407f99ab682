#include "qbm/normal_modes.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "qbm/errors.hpp"

namespace qbm {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Separable H = diag(K, P) (positions, momenta): x'' = -P K x. With
// y = P^{-1/2} x the frequencies are sqrt(eig(P^{1/2} K P^{1/2})).
NormalModes separable_modes(const MatrixXd& h, Index n) {
    MatrixXd k(n, n), p(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            k(i, j) = h(2 * i, 2 * j);
            p(i, j) = h(2 * i + 1, 2 * j + 1);
        }
    }
    MatrixXd p_half, p_inv_half;
    if (p.isDiagonal(0.0)) {
        const VectorXd d = p.diagonal();
        if (d.minCoeff() <= 0.0) throw ParameterRegimeError("kinetic form is not positive definite");
        p_half = d.cwiseSqrt().asDiagonal();
        p_inv_half = d.cwiseSqrt().cwiseInverse().asDiagonal();
    } else {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(p);
        if (es.eigenvalues().minCoeff() <= 0.0) throw ParameterRegimeError("kinetic form is not positive definite");
        p_half = es.operatorSqrt();
        p_inv_half = es.operatorInverseSqrt();
    }
    const MatrixXd dyn = p_half * k * p_half;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (dyn + dyn.transpose()));
    const VectorXd lam2 = es.eigenvalues();
    if (lam2.minCoeff() <= 0.0) {
        throw ParameterRegimeError(fmt::format("potential is not positive definite (lowest squared frequency {:.4e})", lam2.minCoeff()));
    }
    const VectorXd lam = lam2.cwiseSqrt();
    const MatrixXd& w = es.eigenvectors();

    // x = P^{1/2} W L^{-1/2} X,  p = P^{-1/2} W L^{1/2} P
    const MatrixXd x_cols = p_half * w * lam.cwiseSqrt().cwiseInverse().asDiagonal();
    const MatrixXd p_cols = p_inv_half * w * lam.cwiseSqrt().asDiagonal();
    // X = L^{1/2} W^T P^{-1/2} x,  P = L^{-1/2} W^T P^{1/2} p
    const MatrixXd x_rows = lam.cwiseSqrt().asDiagonal() * w.transpose() * p_inv_half;
    const MatrixXd p_rows = lam.cwiseSqrt().cwiseInverse().asDiagonal() * w.transpose() * p_half;

    NormalModes out;
    out.separable = true;
    out.frequencies = lam;
    out.to_phys = MatrixXd::Zero(2 * n, 2 * n);
    out.from_phys = MatrixXd::Zero(2 * n, 2 * n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            out.to_phys(2 * i, 2 * j) = x_cols(i, j);
            out.to_phys(2 * i + 1, 2 * j + 1) = p_cols(i, j);
            out.from_phys(2 * j, 2 * i) = x_rows(j, i);
            out.from_phys(2 * j + 1, 2 * i + 1) = p_rows(j, i);
        }
    }
    return out;
}

// General positive-definite H: K = H^{1/2} J H^{1/2} is real antisymmetric;
// the positive eigenvalues mu_j of the Hermitian iK are the normal-mode
// frequencies and the real/imaginary parts of their eigenvectors span the
// invariant rotation planes.
NormalModes williamson_modes(const MatrixXd& h, Index n) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> hs(h);
    if (hs.eigenvalues().minCoeff() <= 0.0) {
        throw ParameterRegimeError(fmt::format("Hamiltonian form is not positive definite (lowest eigenvalue {:.4e})",
                                               hs.eigenvalues().minCoeff()));
    }
    const MatrixXd h_half = hs.operatorSqrt();
    const MatrixXd h_inv_half = hs.operatorInverseSqrt();
    const MatrixXd kmat = h_half * symplectic_form(n) * h_half;
    const Eigen::MatrixXcd herm = std::complex<double>(0.0, 1.0) * kmat.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ks(herm);

    MatrixXd o(2 * n, 2 * n);
    VectorXd mu(n);
    const double root2 = std::sqrt(2.0);
    for (Index j = 0; j < n; ++j) {
        const Index col = n + j;  // ascending order: the upper half is positive
        mu(j) = ks.eigenvalues()(col);
        const auto q = ks.eigenvectors().col(col);
        o.col(2 * j) = root2 * q.real();
        o.col(2 * j + 1) = -root2 * q.imag();
    }
    if (mu.minCoeff() <= 0.0) throw NumericalError("symplectic spectrum is degenerate at zero frequency");

    NormalModes out;
    out.separable = false;
    out.frequencies = mu;
    out.to_phys = h_inv_half * o;
    out.from_phys = o.transpose() * h_half;
    return out;
}

}  // namespace

MatrixXd symplectic_form(Index n_dof) {
    MatrixXd j = MatrixXd::Zero(2 * n_dof, 2 * n_dof);
    for (Index i = 0; i < n_dof; ++i) {
        j(2 * i, 2 * i + 1) = 1.0;
        j(2 * i + 1, 2 * i) = -1.0;
    }
    return j;
}

NormalModes normal_modes(const MatrixXd& hamiltonian) {
    if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() % 2 != 0) {
        throw ValidationError("Hamiltonian form must be square with even dimension");
    }
    const Index n = hamiltonian.rows() / 2;
    bool separable = true;
    for (Index i = 0; i < n && separable; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (hamiltonian(2 * i, 2 * j + 1) != 0.0) {
                separable = false;
                break;
            }
        }
    }
    return separable ? separable_modes(hamiltonian, n) : williamson_modes(hamiltonian, n);
}

void rotate_columns(Eigen::Ref<MatrixXd> m, const VectorXd& frequencies, double t) {
    for (Index j = 0; j < frequencies.size(); ++j) {
        const double c = std::cos(frequencies(j) * t);
        const double s = std::sin(frequencies(j) * t);
        // R(t): X' = c X + s P, P' = -s X + c P, so (m R)_X = c m_X - s m_P.
        for (Index r = 0; r < m.rows(); ++r) {
            const double mx = m(r, 2 * j);
            const double mp = m(r, 2 * j + 1);
            m(r, 2 * j) = c * mx - s * mp;
            m(r, 2 * j + 1) = s * mx + c * mp;
        }
    }
}

MatrixXd propagator(const NormalModes& modes, double t) {
    MatrixXd lr = modes.to_phys;
    rotate_columns(lr, modes.frequencies, t);
    return lr * modes.from_phys;
}

}  // namespace qbm
