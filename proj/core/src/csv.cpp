#include "qbm/csv.hpp"

#include <fmt/format.h>

#include "qbm/errors.hpp"
#include "qbm/types.hpp"

namespace qbm {

std::string format_number(double x) {
    if (x == 0.0) return "0";
    return fmt::format("{:.12g}", x);
}

std::string_view to_string(CouplingType c) {
    return c == CouplingType::Position ? "position" : "symmetric";
}

std::string_view to_string(Renormalization r) {
    return r == Renormalization::Renormalized ? "renormalized" : "bare";
}

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::NSD: return "NSD";
        case Phase::SDR: return "SDR";
        case Phase::SD: return "SD";
    }
    return "?";
}

CouplingType parse_coupling(std::string_view s) {
    if (s == "position") return CouplingType::Position;
    if (s == "symmetric") return CouplingType::Symmetric;
    throw ValidationError(fmt::format("unknown coupling type '{}' (expected position|symmetric)", s));
}

Renormalization parse_renormalization(std::string_view s) {
    if (s == "renormalized") return Renormalization::Renormalized;
    if (s == "bare") return Renormalization::Bare;
    throw ValidationError(fmt::format("unknown renormalization '{}' (expected renormalized|bare)", s));
}

Phase parse_phase(std::string_view s) {
    if (s == "NSD") return Phase::NSD;
    if (s == "SDR") return Phase::SDR;
    if (s == "SD") return Phase::SD;
    throw ValidationError(fmt::format("unknown phase '{}'", s));
}

}  // namespace qbm
