// phases.hpp: asymptotic layer: equilibrium dispersions of x+, the critical
// squeezing r_crit, the threshold S_crit, the entanglement envelope and the
// three-phase classification.

#pragma once

#include <algorithm>
#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>

#include "qbm/bath.hpp"
#include "qbm/frequencies.hpp"
#include "qbm/gaussian.hpp"
#include "qbm/rwa.hpp"
#include "qbm/types.hpp"

namespace qbm {

struct FullModel;

inline constexpr double kPhaseTieTol = 1e-9;

struct Dispersions {
    double dx{0.0};
    double dp{0.0};
};

/// D(w) = m (Omega_+^2 - w^2) - (2 m gamma0 w / pi) ln|(cutoff - w)/(cutoff + w)| - 2 i m gamma0 w.
std::complex<double> susceptibility_denominator(const OhmicSpectralDensity& j, double omega_plus, double w);
/// Im chi(w) = 2 m gamma0 w / |D(w)|^2 for 0 < w < cutoff.
double susceptibility_imag(const OhmicSpectralDensity& j, double omega_plus, double w);

/// Stationary dispersions of x+ for position coupling:
///   dx^2 = (1/pi) int coth(w/2T) Im chi dw,  dp^2 = (m^2/pi) int w^2 coth(w/2T) Im chi dw.
/// Throws NumericalError when the quadrature does not converge.
Dispersions stationary_variances_position(const OhmicSpectralDensity& j, double omega_plus, double temperature);

/// Balanced pair dp = M Omega dx = sqrt(M Omega * diffusion / (2 gamma)) from the
/// late-time coefficients. Throws ValidationError when the trace has not settled.
Dispersions stationary_variances_symmetric(const CoefficientTrace& trace, double mass_plus, double omega_plus);

/// Dispersions of x+ for either coupling type: quadrature for position
/// coupling, extracted coefficients for symmetric coupling.
Dispersions equilibrium_dispersions(const FullModel& model);

/// 1/2 ln[m_- w_- dx/dp]. With `interacting` the two-term variant
/// 1/2 ln[m Omega dx/dp] + 1/4 ln[w_-/Omega] is returned instead.
double r_crit(double dx_plus, double dp_plus, const ModeSpec& minus, double omega_plus, bool interacting = false);

/// 1/2 ln[4 dx+ dp+ dx- dp-].
double s_crit(double dx_plus, double dp_plus, double dx_minus, double dp_minus);

struct Envelope {
    double mean{0.0};       // E~_N = max(|r|, |r_crit|) - S_crit
    double amplitude{0.0};  // dE_N = min(|r|, |r_crit|)
    double lower() const { return std::max(0.0, mean - amplitude); }
    double upper() const { return std::max(0.0, mean + amplitude); }
};

Envelope envelope(double r, double r_crit, double s_crit);

/// NSD if ||r| - |r_crit|| > S, SD if |r| + |r_crit| < S, SDR otherwise.
/// Ties within kPhaseTieTol go to the less-entangled side.
Phase classify(double r, double r_crit, double s_crit);

struct ResourceFlags {
    bool coherent_entangles{false};     // |r_crit| > 1/2 ln(2 dx+ dp+)
    bool environment_amplifies{false};  // |r_crit| - S_crit >= 2|r|
};

ResourceFlags resource_conditions(double r, double r_crit, double s_crit, double dx_plus, double dp_plus);

struct PhaseSummary {
    double temperature{0.0};
    double r{0.0};
    double c12{0.0};
    double minus_area{0.5};  // dx- dp- of the initial x- mode
    double dx_plus{0.0};
    double dp_plus{0.0};
    double r_crit{0.0};
    double s_crit{0.0};
    double e_mean{0.0};
    double e_amp{0.0};
    Phase phase{Phase::SD};
    ResourceFlags flags;
};

/// Full asymptotic prediction for an x- mode squeezed by r with area dx- dp-.
PhaseSummary summarize(const Dispersions& plus, const ModeSpec& minus, double omega_plus, double r,
                       double minus_area, double temperature, double c12);

/// Header "T,r,C12,purity,dx_plus,dp_plus,r_crit,s_crit,e_mean,e_amp,phase"
/// (purity holds dx- dp-).
std::string phase_summary_header();
std::string phase_summary_row(const PhaseSummary& s);

/// Angular frequency of a sampled oscillation from its mean-crossings,
/// linearly interpolated. Returns 0 when fewer than two upward crossings exist.
double fit_oscillation_frequency(std::span<const double> times, std::span<const double> values);

}  // namespace qbm
