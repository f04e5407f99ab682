// quadrature.hpp: adaptive Gauss-Kronrod integration over panels

#pragma once

#include <functional>
#include <span>

namespace qbm {

struct QuadratureResult {
    double value{0.0};
    double error{0.0};
};

/// Integrates f over [a, b] with adaptive 31-point Gauss-Kronrod on each
/// sub-panel delimited by `breakpoints` (points outside (a, b) are ignored).
/// Throws NumericalError, carrying the achieved error estimate, when the
/// summed error exceeds max(abs_tol, rel_tol * int |f|), with a 100x allowance
/// for the pessimism of the Kronrod estimate.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints = {},
                           double rel_tol = 1e-11, double abs_tol = 1e-13);

}  // namespace qbm
