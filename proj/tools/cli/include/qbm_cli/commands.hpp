// commands.hpp: the four qbm subcommands

#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "qbm_cli/config.hpp"

namespace qbm::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kVerifyFailure = 4 };

struct CommandContext {
    RunConfig config;
    std::filesystem::path out_dir;
    unsigned workers{1};
    bool use_cache{true};
};

/// Trajectories for every (cutoff, C12, purity, T, r) sweep point. A single
/// point writes trajectory.csv; several write trajectory_<k>.csv plus runs.csv.
int cmd_evolve(const CommandContext& ctx);

/// Coefficient trace (symmetric coupling only) as coefficients.csv, with a
/// zero_t_residual column at T = 0 and '#'-prefixed footer metadata.
int cmd_coeffs(const CommandContext& ctx);

/// phase_diagram.csv, boundaries.json, provenance.json and timings.csv.
int cmd_phase_diagram(const CommandContext& ctx);

/// Predicted phase vs simulated late-time E_N on a grid of at most 25 points;
/// writes verify.json. Returns kVerifyFailure if any off-boundary point fails.
int cmd_verify(const CommandContext& ctx);

/// Result label of points closer than the boundary margin to a phase boundary.
inline constexpr const char* kBoundaryExcluded = "boundary — excluded";

struct VerifyOptions {
    double boundary_margin{0.05};
    double envelope_tolerance{0.05};
    double zero_threshold{1e-2};  // E_N below this counts as zero
    double constant_amplitude{1e-3};
    std::size_t max_points{25};
};

/// Predicted summary and simulated late window for one point.
nlohmann::json verify_point(const RunConfig& config, double temperature, double r, double c12, double purity,
                            const VerifyOptions& options = {});

nlohmann::json verify_grid(const RunConfig& config, unsigned workers, const VerifyOptions& options = {});

}  // namespace qbm::cli
