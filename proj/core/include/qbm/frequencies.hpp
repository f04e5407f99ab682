// frequencies.hpp: bath-renormalized frequencies of the virtual modes

#pragma once

#include "qbm/types.hpp"

namespace qbm {

struct VirtualFrequencies {
    double omega_plus{1.0};   // Omega_+ (x+ mode, includes the bath shift)
    double omega_minus{1.0};  // omega_- (x- mode, untouched by the bath)
    double omega_r{1.0};      // Omega_R of the real oscillators
    double c12{0.0};          // renormalized direct coupling C12
    double mass_plus{1.0};    // M: differs from m only for symmetric coupling
    double mass_minus{1.0};
};

/// Asymptotic frequencies from the bare omega0, bare c12 and the bath shift.
///
/// Position coupling:  Omega_+^2 = w0^2 + c12 + shift,  w_-^2 = w0^2 - c12,
///                     Omega_R^2 = w0^2 + shift/2,      C12 = c12 + shift/2.
/// Symmetric coupling (c12 = c12_tilde): with k = 1 + (shift + c12)/w0^2,
///                     M = m/k, Omega = w0 k, and likewise for x- with -c12,
///                     so M Omega = m_- w_- = m w0.
///
/// Throws ParameterRegimeError when any squared frequency is not positive.
VirtualFrequencies renormalized_frequencies(double omega0, double c12, double shift,
                                            CouplingType coupling, double mass = 1.0);

}  // namespace qbm
