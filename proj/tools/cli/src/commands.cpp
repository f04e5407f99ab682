#include "qbm_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"
#include "qbm/phases.hpp"
#include "qbm/rwa.hpp"
#include "qbm_cli/plots.hpp"
#include "qbm_cli/sweep.hpp"

namespace qbm::cli {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError(fmt::format("cannot write {}", path.string()));
    out << text;
}

nlohmann::json provenance(const RunConfig& config, std::string_view command) {
    return {{"command", command}, {"config_digest", config.digest()}, {"version", QBM_VERSION_STRING}};
}

struct EvolvePoint {
    double cutoff, c12, purity, temperature, r;
};

std::vector<EvolvePoint> evolve_points(const RunConfig& c) {
    std::vector<EvolvePoint> out;
    for (double cut : c.sweep.cutoff)
        for (double c12 : c.sweep.c12)
            for (double p : c.sweep.purity)
                for (double t : c.sweep.temperature)
                    for (double r : c.sweep.r) out.push_back({cut, c12, p, t, r});
    return out;
}

}  // namespace

// --- evolve ----------------------------------------------------------------------

int cmd_evolve(const CommandContext& ctx) {
    const RunConfig& c = ctx.config;
    fs::create_directories(ctx.out_dir);
    const auto points = evolve_points(c);
    const bool single = points.size() == 1;
    const auto times = uniform_grid(c.t_max, c.dt);
    std::vector<double> seconds(points.size(), 0.0);

    parallel_for(points.size(), ctx.workers, [&](std::size_t k) {
        const auto& p = points[k];
        const auto start = std::chrono::steady_clock::now();
        const FullModel model = c.model(p.temperature, p.c12, p.cutoff);
        const auto traj = evolve(model, c.initial_state(model, p.r, p.purity), times,
                                 EvolveOptions{.override_horizon = c.override_horizon, .temperature = std::nullopt});
        std::ofstream out(ctx.out_dir / (single ? std::string("trajectory.csv") : fmt::format("trajectory_{}.csv", k)),
                          std::ios::binary);
        write_trajectory_csv(out, traj);
        seconds[k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    if (!single) {
        std::string runs = "index,cutoff,C12,purity,T,r,file\n";
        for (std::size_t k = 0; k < points.size(); ++k) {
            const auto& p = points[k];
            runs += fmt::format("{},{},{},{},{},{},trajectory_{}.csv\n", k, format_number(p.cutoff),
                                format_number(p.c12), format_number(p.purity), format_number(p.temperature),
                                format_number(p.r), k);
        }
        write_text(ctx.out_dir / "runs.csv", runs);
    }
    std::string timings = "index,seconds\n";
    for (std::size_t k = 0; k < seconds.size(); ++k) timings += fmt::format("{},{:.3f}\n", k, seconds[k]);
    write_text(ctx.out_dir / "timings.csv", timings);
    write_text(ctx.out_dir / "provenance.json", provenance(c, "evolve").dump(2) + '\n');
    if (c.plots) write_text(ctx.out_dir / "plot_trajectory.py", trajectory_plot_script(single, points.size()));
    return kOk;
}

// --- coeffs ----------------------------------------------------------------------

int cmd_coeffs(const CommandContext& ctx) {
    const RunConfig& c = ctx.config;
    if (c.coupling != CouplingType::Symmetric) {
        throw UnsupportedError(
            "coeffs supports symmetric coupling only: closed-form time-dependent coefficients for position "
            "coupling are out of scope (its dynamics are simulated exactly by `evolve`)");
    }
    fs::create_directories(ctx.out_dir);
    const FullModel model = c.model();
    const double dt = std::min(c.dt, 0.05 / c.cutoff);
    const auto times = uniform_grid(c.t_max, dt);
    const auto sol = solve_amplitude(model.bath, c.omega, times, c.sign);
    const auto trace = extract_coefficients(sol, model.bath);

    const bool zero_t = c.temperature == 0.0;
    std::string out = zero_t ? "t,gamma,delta_omega2,diffusion,zero_t_residual\n" : "t,gamma,delta_omega2,diffusion\n";
    double max_residual = 0.0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        out += fmt::format("{},{},{},{}", format_number(trace.times[i]), format_number(trace.gamma[i]),
                           format_number(trace.delta_omega2[i]), format_number(trace.diffusion[i]));
        if (zero_t) {
            const double res = std::abs(trace.diffusion[i] - trace.gamma[i]);
            max_residual = std::max(max_residual, res);
            out += ',' + format_number(res);
        }
        out += '\n';
    }
    out += fmt::format("# config_digest={}\n", c.digest());
    out += fmt::format("# unitarity_residual={}\n", format_number(sol.unitarity_residual()));
    if (zero_t) out += fmt::format("# max_zero_t_residual={}\n", format_number(max_residual));
    if (trace.times.size() >= 64) {
        const auto asym = asymptotic_coefficients(trace, std::numeric_limits<double>::infinity());
        out += fmt::format("# final_quarter_drift={}\n", format_number(asym.max_drift));
        out += fmt::format("# gamma_asymptotic={}\n# delta_omega2_asymptotic={}\n# diffusion_asymptotic={}\n",
                           format_number(asym.gamma), format_number(asym.delta_omega2),
                           format_number(asym.diffusion));
    }
    write_text(ctx.out_dir / "coefficients.csv", out);
    write_text(ctx.out_dir / "provenance.json", provenance(c, "coeffs").dump(2) + '\n');
    if (c.plots) write_text(ctx.out_dir / "plot_coefficients.py", coefficients_plot_script());
    return kOk;
}

// --- phase diagram -----------------------------------------------------------------

int cmd_phase_diagram(const CommandContext& ctx) {
    const RunConfig& c = ctx.config;
    fs::create_directories(ctx.out_dir);
    std::optional<PointCache> cache;
    if (ctx.use_cache) cache.emplace(ctx.out_dir / "cache", c.digest());
    const PhaseDiagram diagram = compute_phase_diagram(c, ctx.workers, cache ? &*cache : nullptr);

    write_text(ctx.out_dir / "phase_diagram.csv", phase_diagram_csv(diagram));
    write_text(ctx.out_dir / "boundaries.json", phase_boundaries(c, diagram).dump(2) + '\n');
    auto prov = provenance(c, "phase-diagram");
    std::size_t failed = 0;
    for (const auto& row : diagram.rows) failed += row.status != "ok";
    prov["rows"] = diagram.rows.size();
    prov["failed_rows"] = failed;
    write_text(ctx.out_dir / "provenance.json", prov.dump(2) + '\n');

    std::string timings = "T,C12,seconds,cached,status\n";
    for (const auto& p : diagram.points) {
        timings += fmt::format("{},{},{:.3f},{},{}\n", format_number(p.temperature), format_number(p.c12), p.seconds,
                               p.cached ? 1 : 0, p.status);
    }
    write_text(ctx.out_dir / "timings.csv", timings);
    if (c.plots) write_text(ctx.out_dir / "plot_phase_diagram.py", phase_diagram_plot_script());
    return kOk;
}

// --- verify ------------------------------------------------------------------------

nlohmann::json verify_point(const RunConfig& c, double temperature, double r, double c12, double purity,
                            const VerifyOptions& opt) {
    nlohmann::json j{{"T", temperature}, {"r", r}, {"C12", c12}, {"purity", purity}};
    try {
        const FullModel model = c.model(temperature, c12, c.cutoff);
        const auto f = model.frequencies();
        const auto s =
            summarize(equilibrium_dispersions(model), model.minus_mode(), f.omega_plus, r, purity, temperature, c12);
        const double lower = std::max(0.0, s.e_mean - s.e_amp);
        const double upper = std::max(0.0, s.e_mean + s.e_amp);
        const double margin = std::min(std::abs(std::abs(std::abs(s.r) - std::abs(s.r_crit)) - s.s_crit),
                                       std::abs(std::abs(s.r) + std::abs(s.r_crit) - s.s_crit));

        // four periods of the x- covariance rotation (pi / w-) ending at t_max
        const double period = std::numbers::pi / f.omega_minus;
        const double length = std::min(4.0 * period, 0.5 * c.t_max);
        const ExactSimulator sim(model);
        const auto w = late_window(sim, c.initial_state(model, r, purity), c.t_max, length, 801,
                                   EvolveOptions{.override_horizon = c.override_horizon, .temperature = std::nullopt});
        const std::string simulated = w.min > opt.zero_threshold   ? "always_positive"
                                      : w.max < opt.zero_threshold ? "eventually_zero"
                                                                   : "intermittent";
        const std::string expected = s.phase == Phase::NSD  ? "always_positive"
                                     : s.phase == Phase::SD ? "eventually_zero"
                                                            : "intermittent";
        const double deviation = std::max(std::abs(w.max - upper), std::abs(w.min - lower));
        bool pass = simulated == expected && deviation <= opt.envelope_tolerance;
        if (c.coupling == CouplingType::Symmetric) pass = pass && s.e_amp < opt.constant_amplitude;

        j["predicted_phase"] = std::string(to_string(s.phase));
        j["r_crit"] = s.r_crit;
        j["s_crit"] = s.s_crit;
        j["e_mean"] = s.e_mean;
        j["e_amp"] = s.e_amp;
        j["predicted_min"] = lower;
        j["predicted_max"] = upper;
        j["simulated_min"] = w.min;
        j["simulated_max"] = w.max;
        j["simulated_behavior"] = simulated;
        j["envelope_deviation"] = deviation;
        j["margin"] = margin;
        j["result"] = margin < opt.boundary_margin ? kBoundaryExcluded : pass ? "pass" : "fail";
    } catch (const Error& e) {
        j["result"] = "fail";
        j["error"] = status_of(e);
        j["message"] = e.what();
    }
    return j;
}

nlohmann::json verify_grid(const RunConfig& c, unsigned workers, const VerifyOptions& opt) {
    struct Point {
        double c12, purity, temperature, r;
    };
    std::vector<Point> points;
    for (double c12 : c.sweep.c12)
        for (double p : c.sweep.purity)
            for (double t : c.sweep.temperature)
                for (double r : c.sweep.r) points.push_back({c12, p, t, r});
    if (points.size() > opt.max_points) {
        throw ValidationError(
            fmt::format("verify grid has {} points; at most {} are allowed", points.size(), opt.max_points));
    }

    std::vector<nlohmann::json> results(points.size());
    parallel_for(points.size(), workers, [&](std::size_t k) {
        const auto& p = points[k];
        results[k] = verify_point(c, p.temperature, p.r, p.c12, p.purity, opt);
    });

    nlohmann::json report;
    report["config_digest"] = c.digest();
    report["version"] = QBM_VERSION_STRING;
    report["boundary_margin"] = opt.boundary_margin;
    report["envelope_tolerance"] = opt.envelope_tolerance;
    report["points"] = results;
    nlohmann::json failures = nlohmann::json::array();
    for (std::size_t k = 0; k < results.size(); ++k) {
        if (results[k]["result"] == "fail") failures.push_back(k);
    }
    report["failures"] = failures;
    report["passed"] = failures.empty();
    return report;
}

int cmd_verify(const CommandContext& ctx) {
    fs::create_directories(ctx.out_dir);
    const auto report = verify_grid(ctx.config, ctx.workers);
    write_text(ctx.out_dir / "verify.json", report.dump(2) + '\n');
    if (!report["passed"].get<bool>()) {
        std::string list;
        for (const auto& k : report["failures"]) {
            const auto& p = report["points"][k.get<std::size_t>()];
            list += fmt::format("\n  T={} r={} C12={} purity={}", p["T"].get<double>(), p["r"].get<double>(),
                                p["C12"].get<double>(), p["purity"].get<double>());
        }
        fmt::print(stderr, "verify: {} point(s) failed:{}\n", report["failures"].size(), list);
        return kVerifyFailure;
    }
    return kOk;
}

}  // namespace qbm::cli
