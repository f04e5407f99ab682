#include "qbm/bath.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "qbm/errors.hpp"
#include "qbm/quadrature.hpp"

namespace qbm {

OhmicSpectralDensity::OhmicSpectralDensity(double g, double c, double m) : gamma0(g), cutoff(c), mass(m) {
    if (!(g >= 0.0) || !(c > 0.0) || !(m > 0.0)) {
        throw ValidationError(fmt::format("spectral density needs gamma0 >= 0, cutoff > 0, mass > 0 (got {}, {}, {})", g, c, m));
    }
}

double OhmicSpectralDensity::total_weight() const { return mass * gamma0 * cutoff * cutoff / std::numbers::pi; }

double OhmicSpectralDensity::static_weight() const { return 2.0 * mass * gamma0 * cutoff / std::numbers::pi; }

double OhmicSpectralDensity::static_shift() const { return -2.0 * static_weight() / mass; }

double j_of_w(const OhmicSpectralDensity& j, double w) {
    if (!(w >= 0.0)) throw ValidationError(fmt::format("spectral density evaluated at negative frequency {}", w));
    if (w >= j.cutoff) return 0.0;
    return 2.0 / std::numbers::pi * j.mass * j.gamma0 * w;
}

double thermal_occupation(double w, double temperature) {
    if (!(w > 0.0)) throw ValidationError(fmt::format("thermal occupation needs w > 0 (got {})", w));
    if (temperature < 0.0) throw ValidationError("temperature must be non-negative");
    if (temperature == 0.0) return 0.0;
    return 1.0 / std::expm1(w / temperature);
}

double j_ladder(const OhmicSpectralDensity& j, double w, double reference_frequency) {
    return j_of_w(j, w) / (2.0 * j.mass * reference_frequency);
}

double DiscretizedBath::recurrence_time() const { return 2.0 * std::numbers::pi / spacing; }

double DiscretizedBath::validity_horizon() const { return 0.5 * recurrence_time(); }

double DiscretizedBath::sum_rule() const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        const double c = position_couplings[k];
        s += c * c / (2.0 * masses[k] * frequencies[k]);
    }
    return s;
}

double DiscretizedBath::static_shift() const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        const double c = position_couplings[k];
        s += c * c / (masses[k] * frequencies[k] * frequencies[k]);
    }
    return -s / density.mass;
}

std::vector<double> DiscretizedBath::occupations() const {
    std::vector<double> n(size());
    for (std::size_t k = 0; k < size(); ++k) n[k] = thermal_occupation(frequencies[k], temperature);
    return n;
}

DiscretizedBath discretize(const OhmicSpectralDensity& j, std::size_t n_modes, double temperature,
                           double ladder_reference) {
    if (n_modes < 1) throw ValidationError("bath needs at least one mode");
    if (temperature < 0.0) throw ValidationError("temperature must be non-negative");
    if (!(ladder_reference > 0.0)) throw ValidationError("ladder reference frequency must be positive");
    DiscretizedBath bath;
    bath.density = j;
    bath.temperature = temperature;
    bath.ladder_reference = ladder_reference;
    bath.spacing = j.cutoff / static_cast<double>(n_modes);
    bath.frequencies.resize(n_modes);
    bath.position_couplings.resize(n_modes);
    bath.ladder_couplings.resize(n_modes);
    bath.masses.assign(n_modes, 1.0);
    for (std::size_t k = 0; k < n_modes; ++k) {
        const double w = (static_cast<double>(k) + 0.5) * bath.spacing;
        bath.frequencies[k] = w;
        bath.position_couplings[k] = std::sqrt(2.0 * bath.masses[k] * w * j_of_w(j, w) * bath.spacing);
        bath.ladder_couplings[k] = std::sqrt(j_ladder(j, w, ladder_reference) * bath.spacing);
    }
    return bath;
}

std::complex<double> eta_kernel(const OhmicSpectralDensity& j, double s) {
    if (!(s >= 0.0)) throw ValidationError("eta_kernel needs s >= 0");
    std::vector<double> breaks;
    if (s > 0.0) {
        const double half_period = std::numbers::pi / s;
        for (double w = half_period; w < j.cutoff; w += half_period) breaks.push_back(w);
    }
    const auto re = integrate([&](double w) { return j_of_w(j, w) * std::cos(w * s); }, 0.0, j.cutoff, breaks, 1e-12, 1e-13);
    if (s == 0.0) return {re.value, 0.0};
    const auto im = integrate([&](double w) { return -j_of_w(j, w) * std::sin(w * s); }, 0.0, j.cutoff, breaks, 1e-12, 1e-13);
    return {re.value, im.value};
}

std::complex<double> eta_kernel(const DiscretizedBath& bath, double s) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < bath.size(); ++k) {
        const double c = bath.position_couplings[k];
        const double weight = c * c / (2.0 * bath.masses[k] * bath.frequencies[k]);
        acc += weight * std::polar(1.0, -bath.frequencies[k] * s);
    }
    return acc;
}

}  // namespace qbm
