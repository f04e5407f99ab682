// types.hpp: model-level enumerations shared across modules

#pragma once

#include <string>
#include <string_view>

namespace qbm {

/// Position: H_SE = x+ sum c_n q_n. Symmetric: equal position and momentum
/// channels, which is exactly the rotating-wave form a b^dagger + h.c.
enum class CouplingType { Position, Symmetric };

/// Renormalized: the static bath shift is absorbed into both the oscillator
/// frequency and the direct coupling, so the configured omega and c12 are the
/// physical Omega_R and C12. Bare: only the frequency is renormalized and c12
/// is the bare coupling (C12 = c12 + delta_omega^2 / 2).
enum class Renormalization { Renormalized, Bare };

enum class Phase { NSD, SDR, SD };

std::string_view to_string(CouplingType c);
std::string_view to_string(Renormalization r);
std::string_view to_string(Phase p);

/// Throws ValidationError on unknown names.
CouplingType parse_coupling(std::string_view s);
Renormalization parse_renormalization(std::string_view s);
Phase parse_phase(std::string_view s);

}  // namespace qbm
