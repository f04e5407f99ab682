#include "qbm/phases.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"
#include "qbm/exact_sim.hpp"
#include "qbm/quadrature.hpp"

namespace qbm {

using std::numbers::pi;

VirtualFrequencies renormalized_frequencies(double omega0, double c12, double shift, CouplingType coupling,
                                            double mass) {
    if (!(omega0 > 0.0) || !(mass > 0.0)) throw ValidationError("omega0 and mass must be positive");
    const double w0sq = omega0 * omega0;
    VirtualFrequencies f;
    if (coupling == CouplingType::Position) {
        const double plus_sq = w0sq + c12 + shift;
        const double minus_sq = w0sq - c12;
        const double r_sq = w0sq + 0.5 * shift;
        if (!(plus_sq > 0.0) || !(minus_sq > 0.0) || !(r_sq > 0.0)) {
            throw ParameterRegimeError(fmt::format(
                "non-positive squared frequency (Omega+^2 = {:.6g}, w-^2 = {:.6g}, Omega_R^2 = {:.6g})", plus_sq,
                minus_sq, r_sq));
        }
        f.omega_plus = std::sqrt(plus_sq);
        f.omega_minus = std::sqrt(minus_sq);
        f.omega_r = std::sqrt(r_sq);
        f.c12 = c12 + 0.5 * shift;
        f.mass_plus = mass;
        f.mass_minus = mass;
        return f;
    }
    const double kp = 1.0 + (shift + c12) / w0sq;
    const double km = 1.0 - c12 / w0sq;
    if (!(kp > 0.0) || !(km > 0.0)) {
        throw ParameterRegimeError(fmt::format("symmetric coupling c12 = {:.6g} exceeds omega0^2 = {:.6g}", c12, w0sq));
    }
    f.omega_plus = omega0 * kp;
    f.omega_minus = omega0 * km;
    f.mass_plus = mass / kp;
    f.mass_minus = mass / km;
    f.omega_r = omega0;
    f.c12 = c12;
    return f;
}

std::complex<double> susceptibility_denominator(const OhmicSpectralDensity& j, double omega_plus, double w) {
    const double m = j.mass;
    const double re = m * (omega_plus * omega_plus - w * w) -
                      2.0 * m * j.gamma0 * w / pi * std::log(std::abs((j.cutoff - w) / (j.cutoff + w)));
    return {re, -2.0 * m * j.gamma0 * w};
}

double susceptibility_imag(const OhmicSpectralDensity& j, double omega_plus, double w) {
    return 2.0 * j.mass * j.gamma0 * w / std::norm(susceptibility_denominator(j, omega_plus, w));
}

namespace {

// coth(w / 2T), with the small-argument series and T = 0 handled
double thermal_factor(double w, double temperature) {
    if (temperature == 0.0) return 1.0;
    const double x = w / (2.0 * temperature);
    if (x < 1e-4) return 1.0 / x + x / 3.0;
    return 1.0 / std::tanh(x);
}

}  // namespace

Dispersions stationary_variances_position(const OhmicSpectralDensity& j, double omega_plus, double temperature) {
    if (!(j.gamma0 > 0.0)) throw ValidationError("stationary variances need gamma0 > 0");
    if (temperature < 0.0) throw ValidationError("temperature must be non-negative");
    if (!(omega_plus > 0.0)) throw ValidationError("Omega_+ must be positive");
    std::vector<double> breaks;
    for (double k : {-30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0}) breaks.push_back(omega_plus + k * j.gamma0);
    breaks.push_back(0.5 * omega_plus);
    for (int k = 1; k <= 2; ++k) breaks.push_back(j.cutoff * (1.0 - std::pow(10.0, -k)));

    // The integrand vanishes like 1/ln^2(cutoff - w) at the band edge, so the
    // last panel is integrated in the gap u = cutoff - w, which keeps u exact.
    const double edge = 1e-3 * j.cutoff;
    auto integrand = [&](double w, double gap, int power) {
        const double m = j.mass;
        const double re = m * (omega_plus * omega_plus - w * w) -
                          2.0 * m * j.gamma0 * w / pi * (std::log(gap) - std::log(j.cutoff + w));
        const double im = 2.0 * m * j.gamma0 * w;
        return std::pow(w, power) * thermal_factor(w, temperature) * im / (re * re + im * im);
    };
    auto moment = [&](int power) {
        const double bulk =
            integrate([&](double w) { return integrand(w, j.cutoff - w, power); }, 0.0, j.cutoff - edge, breaks).value;
        boost::math::quadrature::tanh_sinh<double> ts;
        const double tail = ts.integrate([&](double u) { return integrand(j.cutoff - u, u, power); }, 0.0, edge);
        return bulk + tail;
    };
    const double dx2 = moment(0) / pi;
    const double dp2 = j.mass * j.mass * moment(2) / pi;
    if (!(dx2 > 0.0) || !(dp2 > 0.0)) throw NumericalError("stationary variances are not positive");
    return {std::sqrt(dx2), std::sqrt(dp2)};
}

Dispersions stationary_variances_symmetric(const CoefficientTrace& trace, double mass_plus, double omega_plus) {
    const auto c = asymptotic_coefficients(trace);
    if (!(c.gamma > 0.0)) throw ValidationError("asymptotic damping is not positive");
    const double mw = mass_plus * omega_plus;
    const double dp = std::sqrt(mw * c.diffusion / (2.0 * c.gamma));
    return {dp / mw, dp};
}

Dispersions equilibrium_dispersions(const FullModel& model) {
    const auto f = model.frequencies();
    if (model.coupling == CouplingType::Position) {
        return stationary_variances_position(model.bath.density, f.omega_plus, model.bath.temperature);
    }
    const double horizon = coefficient_horizon(model.bath);
    const double dt = 0.05 / model.bath.density.cutoff;
    const auto sol = solve_amplitude(model.bath, f.omega_plus, uniform_grid(horizon, dt));
    return stationary_variances_symmetric(extract_coefficients(sol, model.bath), f.mass_plus, f.omega_plus);
}

double r_crit(double dx_plus, double dp_plus, const ModeSpec& minus, double omega_plus, bool interacting) {
    if (!(dx_plus > 0.0) || !(dp_plus > 0.0)) throw ValidationError("dispersions must be positive");
    if (!interacting) return 0.5 * std::log(minus.mass * minus.frequency * dx_plus / dp_plus);
    if (!(omega_plus > 0.0)) throw ValidationError("Omega_+ must be positive");
    return 0.5 * std::log(minus.mass * omega_plus * dx_plus / dp_plus) + 0.25 * std::log(minus.frequency / omega_plus);
}

double s_crit(double dx_plus, double dp_plus, double dx_minus, double dp_minus) {
    if (!(dx_plus > 0.0) || !(dp_plus > 0.0) || !(dx_minus > 0.0) || !(dp_minus > 0.0)) {
        throw ValidationError("dispersions must be positive");
    }
    return 0.5 * std::log(4.0 * dx_plus * dp_plus * dx_minus * dp_minus);
}

Envelope envelope(double r, double rc, double s) {
    const double a = std::abs(r), b = std::abs(rc);
    return {std::max(a, b) - s, std::min(a, b)};
}

Phase classify(double r, double rc, double s) {
    const double a = std::abs(r), b = std::abs(rc);
    if (std::abs(a - b) > s + kPhaseTieTol) return Phase::NSD;
    if (a + b <= s + kPhaseTieTol) return Phase::SD;
    return Phase::SDR;
}

ResourceFlags resource_conditions(double r, double rc, double s, double dx_plus, double dp_plus) {
    ResourceFlags f;
    f.coherent_entangles = std::abs(rc) > 0.5 * std::log(2.0 * dx_plus * dp_plus);
    f.environment_amplifies = std::abs(rc) - s >= 2.0 * std::abs(r);
    return f;
}

PhaseSummary summarize(const Dispersions& plus, const ModeSpec& minus, double omega_plus, double r,
                       double minus_area, double temperature, double c12) {
    PhaseSummary out;
    out.temperature = temperature;
    out.r = r;
    out.c12 = c12;
    out.minus_area = minus_area;
    out.dx_plus = plus.dx;
    out.dp_plus = plus.dp;
    out.r_crit = r_crit(plus.dx, plus.dp, minus, omega_plus);
    const auto [dxm, dpm] = squeezed_dispersions(r, minus_area, minus);
    out.s_crit = s_crit(plus.dx, plus.dp, dxm, dpm);
    const auto e = envelope(r, out.r_crit, out.s_crit);
    out.e_mean = e.mean;
    out.e_amp = e.amplitude;
    out.phase = classify(r, out.r_crit, out.s_crit);
    out.flags = resource_conditions(r, out.r_crit, out.s_crit, plus.dx, plus.dp);
    return out;
}

std::string phase_summary_header() { return "T,r,C12,purity,dx_plus,dp_plus,r_crit,s_crit,e_mean,e_amp,phase"; }

std::string phase_summary_row(const PhaseSummary& s) {
    std::string row;
    for (double v : {s.temperature, s.r, s.c12, s.minus_area, s.dx_plus, s.dp_plus, s.r_crit, s.s_crit, s.e_mean,
                     s.e_amp}) {
        row += format_number(v);
        row += ',';
    }
    row += to_string(s.phase);
    return row;
}

double fit_oscillation_frequency(std::span<const double> times, std::span<const double> values) {
    if (times.size() != values.size()) throw ValidationError("times and values differ in length");
    if (times.size() < 4) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double a = values[i] - mean, b = values[i + 1] - mean;
        if (a < 0.0 && b >= 0.0) crossings.push_back(times[i] + (times[i + 1] - times[i]) * (-a) / (b - a));
    }
    if (crossings.size() < 2) return 0.0;
    return 2.0 * pi * static_cast<double>(crossings.size() - 1) / (crossings.back() - crossings.front());
}

}  // namespace qbm
