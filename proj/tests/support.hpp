// support.hpp - small helpers shared by the test executables

#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "qbm/gaussian.hpp"

namespace qbm::test {

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Single-mode symplectic pieces embedded in the 4x4 ordering (x1, p1, x2, p2).
inline Mat4 local_squeeze(double s1, double s2) {
    Mat4 s = Mat4::Zero();
    s(0, 0) = std::exp(-s1);
    s(1, 1) = std::exp(s1);
    s(2, 2) = std::exp(-s2);
    s(3, 3) = std::exp(s2);
    return s;
}

inline Mat4 local_rotation(double a1, double a2) {
    Mat4 s = Mat4::Zero();
    s.block<2, 2>(0, 0) << std::cos(a1), std::sin(a1), -std::sin(a1), std::cos(a1);
    s.block<2, 2>(2, 2) << std::cos(a2), std::sin(a2), -std::sin(a2), std::cos(a2);
    return s;
}

// Random symplectic matrix built from rotations, squeezers and beam splitters.
inline Mat4 random_symplectic(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(0.0, 6.283185307179586), sq(-1.0, 1.0);
    Mat4 s = Mat4::Identity();
    for (int k = 0; k < 3; ++k) {
        s = local_rotation(angle(rng), angle(rng)) * s;
        s = local_squeeze(sq(rng), sq(rng)) * s;
        s = beam_splitter_matrix() * s;
    }
    return s;
}

// Physical covariance S diag(nu1, nu1, nu2, nu2) S^T with nu >= 1/2.
inline Mat4 random_physical(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> nu(0.5, 3.0);
    const double a = nu(rng), b = nu(rng);
    const Mat4 s = random_symplectic(rng);
    return s * Eigen::Vector4d(a, a, b, b).asDiagonal() * s.transpose();
}

}  // namespace qbm::test
