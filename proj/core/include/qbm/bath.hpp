// bath.hpp: Ohmic spectral density, thermal occupations, the memory kernel
// and the deterministic N-mode discretization of the environment.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qbm {

/// J(w) = (2/pi) m gamma0 w theta(cutoff - w), in the position-coupling
/// convention J(w) = sum_n c_n^2 delta(w - w_n) / (2 m_n w_n).
struct OhmicSpectralDensity {
    double gamma0{0.1};
    double cutoff{20.0};
    double mass{1.0};

    OhmicSpectralDensity() = default;
    OhmicSpectralDensity(double gamma0, double cutoff, double mass = 1.0);

    /// Integral of J over [0, cutoff]: m gamma0 cutoff^2 / pi.
    double total_weight() const;
    /// Integral of J(w)/w over [0, cutoff]: 2 m gamma0 cutoff / pi.
    double static_weight() const;
    /// Static frequency shift of the coupled coordinate, -(2/m) int J/w dw.
    double static_shift() const;
};

double j_of_w(const OhmicSpectralDensity& j, double w);

/// Bose occupation 1/(e^{w/T} - 1); zero at T = 0.
double thermal_occupation(double w, double temperature);

/// Ladder-operator density used by the symmetric (rotating-wave) model:
/// J_rwa(w) = J(w) / (2 m w_ref). With w_ref equal to the system frequency the
/// amplitude damping rate at resonance matches the position-coupling rate.
double j_ladder(const OhmicSpectralDensity& j, double w, double reference_frequency);

struct DiscretizedBath {
    std::vector<double> frequencies;         // w_k = (k - 1/2) dw, strictly increasing
    std::vector<double> position_couplings;  // c_k, c_k^2 = 2 m_k w_k J(w_k) dw
    std::vector<double> ladder_couplings;    // g_k, g_k^2 = J_rwa(w_k) dw
    std::vector<double> masses;              // m_k
    double temperature{0.0};
    double spacing{0.0};                     // dw = cutoff / N
    double ladder_reference{1.0};
    OhmicSpectralDensity density;

    std::size_t size() const noexcept { return frequencies.size(); }
    /// 2 pi / dw: the discrete comb re-phases after this time.
    double recurrence_time() const;
    /// Half the recurrence time; trajectories are trusted only below it.
    double validity_horizon() const;
    /// sum_k c_k^2 / (2 m_k w_k), the discrete counterpart of int J dw.
    double sum_rule() const;
    /// -(1/m) sum_k c_k^2 / (m_k w_k^2), exact for the discretized model.
    double static_shift() const;
    /// Thermal occupations n_k at the bath temperature.
    std::vector<double> occupations() const;
};

/// Midpoint discretization of [0, cutoff] into N modes of unit mass.
DiscretizedBath discretize(const OhmicSpectralDensity& j, std::size_t n_modes, double temperature,
                           double ladder_reference = 1.0);

/// eta(s) = int_0^inf J(w) e^{-i w s} dw by adaptive quadrature on panels no
/// wider than half an oscillation period.
std::complex<double> eta_kernel(const OhmicSpectralDensity& j, double s);

/// Discrete counterpart sum_k c_k^2/(2 m_k w_k) e^{-i w_k s} of eta_kernel.
std::complex<double> eta_kernel(const DiscretizedBath& bath, double s);

}  // namespace qbm
