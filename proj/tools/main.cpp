// qbm - command-line driver for trajectories, coefficient traces and phase diagrams

#include <cstdlib>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qbm/errors.hpp"
#include "qbm_cli/commands.hpp"
#include "qbm_cli/config.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    unsigned workers{0};
    bool override_horizon{false};
    bool no_cache{false};
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "INI run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (default: [output] dir of the config)");
    sub->add_option("--workers", o.workers, "worker threads (default: QBM_WORKERS or all cores)");
    sub->add_flag("--override-horizon", o.override_horizon, "allow t_max beyond half the recurrence time");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement dynamics of two oscillators in a common bath"};
    app.set_version_flag("--version", QBM_VERSION_STRING);
    app.require_subcommand(1);
    Options o;
    auto* evolve = app.add_subcommand("evolve", "exact trajectories of the reduced two-oscillator state");
    auto* coeffs = app.add_subcommand("coeffs", "master-equation coefficient trace (symmetric coupling)");
    auto* phase = app.add_subcommand("phase-diagram", "asymptotic phase labels over a (T, r) grid");
    auto* verify = app.add_subcommand("verify", "check predicted phases against simulation (<= 25 points)");
    for (auto* sub : {evolve, coeffs, phase, verify}) add_common(sub, o);
    phase->add_flag("--no-cache", o.no_cache, "ignore and do not write the per-point cache");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qbm::cli::kConfigError;
    }

    try {
        qbm::cli::CommandContext ctx;
        ctx.config = qbm::cli::load_config(o.config, o.override_horizon);
        ctx.out_dir = o.out.empty() ? ctx.config.out_dir : std::filesystem::path(o.out);
        ctx.workers = qbm::cli::resolve_workers(o.workers ? o.workers : ctx.config.workers);
        ctx.use_cache = !o.no_cache;

        if (*evolve) return qbm::cli::cmd_evolve(ctx);
        if (*coeffs) return qbm::cli::cmd_coeffs(ctx);
        if (*phase) return qbm::cli::cmd_phase_diagram(ctx);
        return qbm::cli::cmd_verify(ctx);
    } catch (const qbm::ValidationError& e) {
        fmt::print(stderr, "qbm: configuration error: {}\n", e.what());
        return qbm::cli::kConfigError;
    } catch (const qbm::UnsupportedError& e) {
        fmt::print(stderr, "qbm: unsupported: {}\n", e.what());
        return qbm::cli::kConfigError;
    } catch (const qbm::HorizonError& e) {
        fmt::print(stderr, "qbm: {} (validity horizon {:.6g})\n", e.what(), e.horizon());
        return qbm::cli::kNumericalError;
    } catch (const qbm::NumericalError& e) {
        fmt::print(stderr, "qbm: numerical error: {}\n", e.what());
        return qbm::cli::kNumericalError;
    } catch (const std::exception& e) {
        fmt::print(stderr, "qbm: {}\n", e.what());
        return qbm::cli::kNumericalError;
    }
}
