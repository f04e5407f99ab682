#include "qbm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "qbm/errors.hpp"

namespace qbm {

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double rel_tol, double abs_tol) {
    using boost::math::quadrature::gauss_kronrod;
    std::vector<double> nodes{a};
    for (double x : breakpoints) {
        if (x > a && x < b) nodes.push_back(x);
    }
    std::sort(nodes.begin(), nodes.end());
    // breakpoints that land on b up to round-off would leave a sliver panel
    const double sliver = 1e-12 * (b - a);
    std::vector<double> merged{a};
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (nodes[i] - merged.back() > sliver && b - nodes[i] > sliver) merged.push_back(nodes[i]);
    }
    merged.push_back(b);
    nodes.swap(merged);

    // Boost's tolerance is relative to each panel; scale it so that every
    // panel aims at rel_tol of the whole integral, otherwise panels where f
    // is tiny (e.g. next to a log singularity) are refined without end.
    std::vector<double> rough(nodes.size() - 1, 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (nodes[i + 1] <= nodes[i]) continue;
        double l1 = 0.0;
        gauss_kronrod<double, 31>::integrate(f, nodes[i], nodes[i + 1], 0, 0.0, nullptr, &l1);
        rough[i] = l1;
        scale += l1;
    }

    QuadratureResult total;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (nodes[i + 1] <= nodes[i]) continue;
        double err = 0.0;
        const double tol = std::min(1e-3, std::max(rel_tol * scale, abs_tol) / std::max(rough[i], 1e-300));
        const double v = gauss_kronrod<double, 31>::integrate(f, nodes[i], nodes[i + 1], 20, std::max(tol, rel_tol), &err);
        total.value += v;
        total.error += err;
    }
    if (!std::isfinite(total.value) || total.error > std::max(abs_tol, rel_tol * std::max(scale, std::abs(total.value))) * 100.0) {
        throw NumericalError(fmt::format("quadrature on [{}, {}] did not converge (error estimate {:.3e})", a, b, total.error),
                             total.error);
    }
    return total;
}

}  // namespace qbm
