// config.hpp: run configuration: INI parsing, defaults and validation

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbm/exact_sim.hpp"
#include "qbm/types.hpp"

namespace qbm::cli {

enum class InitialKind { TwoModeSqueezed, CoherentProduct, SqueezedProduct, ExplicitCovariance };

struct InitialSpec {
    InitialKind kind{InitialKind::TwoModeSqueezed};
    double r{0.0};
    double purity{0.5};  // dx- dp- of the x- mode
    std::vector<double> covariance;  // 16 entries, row-major (explicit only)
    std::vector<double> mean;        // 4 entries
};

struct SweepAxes {
    std::vector<double> temperature;
    std::vector<double> r;
    std::vector<double> c12;
    std::vector<double> purity;
    std::vector<double> cutoff;  // evolve only
};

struct RunConfig {
    // [model]
    double mass{1.0};
    double omega{1.0};
    double c12{0.0};
    double c12_tilde{0.0};
    CouplingType coupling{CouplingType::Position};
    Renormalization renormalization{Renormalization::Renormalized};
    // [bath]
    double gamma0{0.1};
    double cutoff{20.0};
    double temperature{0.0};
    std::size_t modes{1000};
    // [initial]
    InitialSpec initial;
    // [time]
    double t_max{100.0};
    double dt{0.005};
    bool override_horizon{false};
    // [sweep]
    SweepAxes sweep;
    // [output]
    std::filesystem::path out_dir{"out"};
    bool plots{true};
    // [run]
    unsigned workers{0};  // 0: QBM_WORKERS or hardware concurrency
    int sign{1};          // amplitude-equation sign convention

    /// Model at the given sweep point.
    FullModel model(double temperature, double c12, double cutoff) const;
    FullModel model() const { return model(temperature, c12, cutoff); }
    /// Initial system state for a model, squeezing r and x- area.
    GaussianState initial_state(const FullModel& model, double r, double purity) const;
    GaussianState initial_state(const FullModel& m) const { return initial_state(m, initial.r, initial.purity); }

    /// Canonical text of every resolved setting except output and worker
    /// settings; hashed into the config digest.
    std::string canonical() const;
    std::string digest() const;
};

/// Parses, defaults and validates. Throws ValidationError listing every
/// problem found (missing file, syntax error with line number, unknown
/// section or key, malformed value, broken invariant). `override_horizon`
/// forces the [time] flag on before validation.
RunConfig load_config(const std::filesystem::path& path, bool override_horizon = false);
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>",
                       bool override_horizon = false);

/// Re-checks invariants that command-line overrides can affect.
void validate(const RunConfig& config);

/// Worker count: explicit value, else QBM_WORKERS, else hardware concurrency.
unsigned resolve_workers(unsigned requested);

std::string_view to_string(InitialKind kind);

}  // namespace qbm::cli
