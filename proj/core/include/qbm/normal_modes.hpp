// normal_modes.hpp: symplectic diagonalization of a positive-definite
// quadratic Hamiltonian H = r^T H r / 2 in interleaved ordering
// r = (x_0, p_0, x_1, p_1, ...).
//
// With normal coordinates z = from_phys * r, every pair (X_j, P_j) rotates
// rigidly at frequency omega_j, so exp(J H t) = to_phys * R(t) * from_phys
// holds exactly for any t; no time stepping is involved.

#pragma once

#include <Eigen/Core>

namespace qbm {

struct NormalModes {
    Eigen::VectorXd frequencies;  // omega_j > 0, one per degree of freedom
    Eigen::MatrixXd to_phys;      // 2n x 2n, columns (X_j, P_j)
    Eigen::MatrixXd from_phys;    // inverse of to_phys
    bool separable{false};        // true when the x-p cross block of H vanished
};

/// Interleaved symplectic form of n degrees of freedom.
Eigen::MatrixXd symplectic_form(Eigen::Index n_dof);

/// Throws ParameterRegimeError if H is not positive definite.
NormalModes normal_modes(const Eigen::MatrixXd& hamiltonian);

/// Applies R(t) to the columns of `m` (m -> m * R(t)); m has 2n columns.
void rotate_columns(Eigen::Ref<Eigen::MatrixXd> m, const Eigen::VectorXd& frequencies, double t);

/// Dense propagator S(t) = exp(J H t).
Eigen::MatrixXd propagator(const NormalModes& modes, double t);

}  // namespace qbm
