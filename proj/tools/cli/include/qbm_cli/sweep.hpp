// sweep.hpp: deterministic parallel evaluation of phase-diagram grids

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbm/phases.hpp"
#include "qbm_cli/config.hpp"

namespace qbm::cli {

/// Runs task(i) for i in [0, n) on `workers` threads. Tasks must write only
/// to their own slots; exceptions escaping a task are rethrown after all
/// workers have stopped.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task);

/// Maps an exception to the status code written in result rows.
std::string status_of(const std::exception& e);

struct DispersionPoint {
    double temperature{0.0};
    double c12{0.0};
    std::optional<Dispersions> value;
    std::string status{"ok"};
    double seconds{0.0};
    bool cached{false};
};

/// Equilibrium x+ dispersions of the configured model at (T, c12).
Dispersions compute_dispersions(const RunConfig& config, double temperature, double c12);

/// Per-point cache under `dir`, keyed by the full config digest plus the point.
class PointCache {
public:
    PointCache(std::filesystem::path dir, std::string config_digest);
    std::optional<DispersionPoint> load(double temperature, double c12) const;
    void store(const DispersionPoint& point) const;

private:
    std::filesystem::path path_for(double temperature, double c12) const;
    std::filesystem::path dir_;
    std::string digest_;
};

struct GridRow {
    PhaseSummary summary;
    std::string status{"ok"};
};

/// Rows ordered c12 (outer), purity, T, r (inner): row-major over (T, r)
/// within each (c12, purity) slice.
struct PhaseDiagram {
    std::vector<double> temperature, r, c12, purity;
    std::vector<GridRow> rows;
    std::vector<DispersionPoint> points;  // ordered c12 (outer), T (inner)

    std::size_t index(std::size_t ic, std::size_t ip, std::size_t it, std::size_t ir) const {
        return ((ic * purity.size() + ip) * temperature.size() + it) * r.size() + ir;
    }
    const DispersionPoint& point(std::size_t ic, std::size_t it) const { return points[ic * temperature.size() + it]; }
};

PhaseDiagram compute_phase_diagram(const RunConfig& config, unsigned workers, const PointCache* cache = nullptr);

/// CSV with the PhaseSummary columns plus a trailing status column.
std::string phase_diagram_csv(const PhaseDiagram& diagram);

/// Phase boundaries per (c12, purity) slice as polylines in the (T, r) plane,
/// located by bisection on ||r|-|r_crit|| - S_crit (NSD edge) and
/// |r| + |r_crit| - S_crit (SD edge) along grid edges.
nlohmann::json phase_boundaries(const RunConfig& config, const PhaseDiagram& diagram);

}  // namespace qbm::cli
