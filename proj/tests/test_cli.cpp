#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>

#include "qbm/errors.hpp"
#include "qbm_cli/commands.hpp"
#include "qbm_cli/config.hpp"
#include "qbm_cli/sweep.hpp"

using namespace qbm;
using namespace qbm::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kSource{QBM_SOURCE_DIR};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qbm_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string what_of(const std::string& text) {
    try {
        parse_config(text, "cfg.ini");
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

constexpr const char* kPosition = R"(
[model]
omega = 1
[bath]
gamma0 = 0.1
cutoff = 20
modes = 400
[time]
t_max = 60
[sweep]
temperature = 0, 5, 10
r = 0:3:7
)";

}  // namespace

TEST_CASE("config defaults and validation") {
    const auto c = parse_config("[model]\nomega = 1\n[bath]\ngamma0 = 0.1\ncutoff = 20\ntemperature = 10\n"
                                "[initial]\nr = 3\n");
    CHECK(c.modes == 1000);
    CHECK(c.dt == 0.005);
    CHECK(c.t_max == 100.0);
    CHECK(c.sweep.temperature == std::vector<double>{10.0});
    CHECK(c.sweep.r == std::vector<double>{3.0});

    const std::string horizon = what_of("[bath]\nmodes = 100\n[time]\nt_max = 100\n");
    CHECK(horizon.find("validity horizon") != std::string::npos);
    CHECK(parse_config("[bath]\nmodes = 100\n[time]\nt_max = 100\noverride_horizon = true\n").override_horizon);

    CHECK(what_of("[bath]\nfrobnicate = 1\n").find("unknown key 'frobnicate' in [bath]") != std::string::npos);
    CHECK(what_of("[nope]\nx = 1\n").find("unknown section [nope]") != std::string::npos);
    CHECK(what_of("[model]\nomega = 1\n[bath\n").find("cfg.ini:3") != std::string::npos);

    const std::string many = what_of("[model]\nomega = -1\n[bath]\ngamma0 = x\n[time]\ndt = 0.02\n");
    CHECK(many.find("3 configuration errors") != std::string::npos);
    CHECK(many.find("omega must be positive") != std::string::npos);
    CHECK(many.find("gamma0") != std::string::npos);
    CHECK(many.find("dt * cutoff") != std::string::npos);

    CHECK_THROWS_AS(load_config(kSource / "configs" / "does_not_exist.ini"), ValidationError);
}

TEST_CASE("shipped configs") {
    for (const char* name : {"fig2_left", "fig2_right", "fig3a", "fig3b", "fig3c", "fig4", "fig5"}) {
        CAPTURE(name);
        CHECK_NOTHROW(load_config(kSource / "configs" / (std::string(name) + ".ini")));
    }
    const auto a = load_config(kSource / "configs" / "fig3a.ini");
    CHECK(a.temperature == 10.0);
    CHECK(a.omega == 1.0);
    CHECK(a.renormalization == Renormalization::Renormalized);
    CHECK(a.gamma0 == 0.1);
    CHECK(a.cutoff == 20.0);
    CHECK(a.initial.r == 3.0);
    CHECK(a.sweep.c12 == std::vector<double>{-0.5, 0.0, 0.5});

    const auto b = load_config(kSource / "configs" / "fig3b.ini");
    CHECK(b.renormalization == Renormalization::Bare);
    CHECK(b.c12 == 0.0);
    CHECK(b.sweep.cutoff.size() == 3);

    const auto left = load_config(kSource / "configs" / "fig2_left.ini");
    CHECK(left.sweep.temperature.size() == 21);
    CHECK(left.sweep.temperature.back() == 10.0);
    CHECK(left.sweep.r.size() == 31);
    CHECK(load_config(kSource / "configs" / "fig2_right.ini").coupling == CouplingType::Symmetric);
    CHECK(load_config(kSource / "configs" / "fig4.ini").sweep.purity == std::vector<double>{1.0});
    CHECK(load_config(kSource / "configs" / "fig5.ini").sweep.c12 == std::vector<double>{-0.5});
}

TEST_CASE("config digest covers numerics, not output settings") {
    const auto a = parse_config(kPosition);
    auto b = parse_config(std::string(kPosition) + "[output]\ndir = elsewhere\n[run]\nworkers = 3\n");
    CHECK(a.digest() == b.digest());
    CHECK(a.digest().size() == 64);
    const std::string more_modes = std::string(kPosition).replace(std::string(kPosition).find("modes = 400"), 11,
                                                                  "modes = 500");
    CHECK(parse_config(more_modes).digest() != a.digest());
    b.dt = 0.004;
    CHECK(b.digest() != a.digest());
}

TEST_CASE("parallel_for") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));

    std::atomic<int> done{0};
    CHECK_THROWS_AS(parallel_for(50, 3,
                                 [&](std::size_t i) {
                                     if (i == 7) throw NumericalError("boom", 0.0);
                                     ++done;
                                 }),
                    NumericalError);
    CHECK(done.load() <= 49);
    CHECK(status_of(HorizonError("h", 1.0)) == "horizon_error");
    CHECK(status_of(ParameterRegimeError("p")) == "parameter_regime_error");
}

TEST_CASE("evolve") {
    SUBCASE("decoupled bath keeps E_N constant") {
        auto c = parse_config("[bath]\ngamma0 = 0\nmodes = 200\n[initial]\nr = 0.8\n[time]\nt_max = 20\n"
                              "[output]\nplots = false\n");
        const fs::path out = scratch("evolve_free");
        REQUIRE(cmd_evolve({c, out, 1, true}) == kOk);
        std::istringstream in(slurp(out / "trajectory.csv"));
        std::string line;
        std::getline(in, line);
        CHECK(line == "t,Exx11,Exp11,Exx12,Exp12,Epp11,Epx12,Epp12,Exx22,Exp22,Epp22,EN");
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            const double en = std::stod(line.substr(line.rfind(',') + 1));
            CHECK(en == doctest::Approx(1.6).epsilon(1e-9));
            ++rows;
        }
        CHECK(rows == 4001);
    }
    SUBCASE("output is byte-identical across worker counts") {
        auto c = parse_config("[bath]\nmodes = 200\n[time]\nt_max = 10\ndt = 0.005\n[sweep]\nr = 0.5, 1\n"
                              "c12 = 0, -0.2\n[output]\nplots = false\n");
        const fs::path one = scratch("evolve_w1"), three = scratch("evolve_w3");
        REQUIRE(cmd_evolve({c, one, 1, true}) == kOk);
        REQUIRE(cmd_evolve({c, three, 3, true}) == kOk);
        CHECK(fs::exists(one / "runs.csv"));
        for (const char* f : {"runs.csv", "trajectory_0.csv", "trajectory_3.csv", "provenance.json"}) {
            CAPTURE(f);
            CHECK(slurp(one / f) == slurp(three / f));
        }
    }
}

TEST_CASE("coeffs") {
    const fs::path out = scratch("coeffs");
    auto pos = parse_config("[bath]\nmodes = 200\n[time]\nt_max = 10\n");
    CHECK_THROWS_AS(cmd_coeffs({pos, out, 1, true}), UnsupportedError);

    auto sym = parse_config("[model]\ncoupling = symmetric\n[bath]\nmodes = 400\ntemperature = 0\n[time]\nt_max = 60\n"
                            "[output]\nplots = false\n");
    REQUIRE(cmd_coeffs({sym, out, 1, true}) == kOk);
    const std::string text = slurp(out / "coefficients.csv");
    CHECK(text.rfind("t,gamma,delta_omega2,diffusion,zero_t_residual\n", 0) == 0);
    const auto pos_res = text.find("# max_zero_t_residual=");
    REQUIRE(pos_res != std::string::npos);
    CHECK(std::stod(text.substr(pos_res + 22)) < 1e-6);

    auto free = parse_config("[model]\ncoupling = symmetric\n[bath]\ngamma0 = 0\nmodes = 200\ntemperature = 1\n"
                             "[time]\nt_max = 5\n[output]\nplots = false\n");
    const fs::path out0 = scratch("coeffs_free");
    REQUIRE(cmd_coeffs({free, out0, 1, true}) == kOk);
    std::istringstream in(slurp(out0 / "coefficients.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line) && line[0] != '#') {
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        for (int k = 0; k < 3; ++k) {
            std::getline(row, cell, ',');
            CHECK(std::stod(cell) == 0.0);
        }
    }
}

TEST_CASE("phase diagram, position coupling") {
    const auto c = parse_config(std::string(kPosition) + "purity = 0.5, 1\n");
    const auto d = compute_phase_diagram(c, 2);
    REQUIRE(d.rows.size() == 3 * 7 * 2);
    std::set<std::pair<std::size_t, std::size_t>> nsd_pure, nsd_mixed;
    for (std::size_t it = 0; it < 3; ++it) {
        for (std::size_t ir = 0; ir < 7; ++ir) {
            const auto& p = d.rows[d.index(0, 0, it, ir)];
            const auto& m = d.rows[d.index(0, 1, it, ir)];
            CHECK(p.status == "ok");
            CHECK(p.summary.r == d.r[ir]);
            if (p.summary.phase == Phase::NSD) nsd_pure.insert({it, ir});
            if (m.summary.phase == Phase::NSD) nsd_mixed.insert({it, ir});
        }
    }
    CHECK(std::includes(nsd_pure.begin(), nsd_pure.end(), nsd_mixed.begin(), nsd_mixed.end()));
    CHECK(nsd_mixed.size() < nsd_pure.size());

    // deterministic CSV regardless of worker count
    CHECK(phase_diagram_csv(d) == phase_diagram_csv(compute_phase_diagram(c, 1)));
    const std::string csv = phase_diagram_csv(d);
    CHECK(csv.rfind(phase_summary_header() + ",status\n", 0) == 0);

    const auto b = phase_boundaries(c, d);
    CHECK(b["slices"].size() == 2);
    CHECK(b["config_digest"] == c.digest());
}

TEST_CASE("fail isolation and cache soundness") {
    const auto c = parse_config(std::string(kPosition) + "c12 = 0, 2\n");
    const auto d = compute_phase_diagram(c, 2);
    std::size_t failed = 0;
    for (std::size_t it = 0; it < 3; ++it) {
        for (std::size_t ir = 0; ir < 7; ++ir) {
            CHECK(d.rows[d.index(0, 0, it, ir)].status == "ok");
            const auto& bad = d.rows[d.index(1, 0, it, ir)];
            CHECK(bad.status == "parameter_regime_error");
            failed += bad.status != "ok";
        }
    }
    CHECK(failed == 21);
    CHECK(phase_diagram_csv(d).find("nan,nan,nan,nan,nan,nan,NA,parameter_regime_error") != std::string::npos);

    const fs::path dir = scratch("cache");
    const PointCache cache(dir, c.digest());
    DispersionPoint p{5.0, 0.0, Dispersions{0.9, 1.1}, "ok", 0.5, false};
    cache.store(p);
    const auto hit = cache.load(5.0, 0.0);
    REQUIRE(hit.has_value());
    CHECK(hit->cached);
    CHECK(hit->value->dx == 0.9);
    CHECK(hit->value->dp == 1.1);
    CHECK_FALSE(cache.load(5.0, 0.1).has_value());

    std::string other = std::string(kPosition);
    other.replace(other.find("modes = 400"), 11, "modes = 500");
    const PointCache stale(dir, parse_config(other).digest());
    CHECK_FALSE(stale.load(5.0, 0.0).has_value());

    // a cached run reproduces the uncached numbers
    const fs::path out = scratch("pd_cache");
    auto cc = c;
    cc.plots = false;
    REQUIRE(cmd_phase_diagram({cc, out, 2, true}) == kOk);
    const std::string first = slurp(out / "phase_diagram.csv");
    REQUIRE(cmd_phase_diagram({cc, out, 1, true}) == kOk);
    CHECK(slurp(out / "phase_diagram.csv") == first);
    CHECK(slurp(out / "timings.csv").find(",1,") != std::string::npos);
}

TEST_CASE("phase diagram, symmetric coupling has two phases only") {
    const auto c = parse_config("[model]\ncoupling = symmetric\n[bath]\nmodes = 1000\n[time]\nt_max = 60\n"
                                "[sweep]\ntemperature = 0, 4\nr = 0:3:31\n");
    const auto d = compute_phase_diagram(c, 2);
    std::set<Phase> seen;
    for (const auto& row : d.rows) {
        REQUIRE(row.status == "ok");
        seen.insert(row.summary.phase);
        CHECK(std::abs(row.summary.r_crit) < 1e-9);
        CHECK(row.summary.e_amp < 1e-3);
    }
    CHECK_FALSE(seen.contains(Phase::SDR));
    CHECK(seen.contains(Phase::NSD));
}

TEST_CASE("phase diagram, C12 = -0.5 has SDR at the highest temperature") {
    const auto c = load_config(kSource / "configs" / "fig5.ini");
    const auto d = compute_phase_diagram(c, 2);
    const std::size_t top = d.temperature.size() - 1;
    bool sdr = false;
    for (std::size_t ir = 0; ir < d.r.size(); ++ir) sdr |= d.rows[d.index(0, 0, top, ir)].summary.phase == Phase::SDR;
    CHECK(sdr);
}

TEST_CASE("verify") {
    auto c = parse_config(std::string(kPosition));
    c.t_max = 60.0;

    SUBCASE("off-boundary point agrees with the simulation") {
        const auto j = verify_point(c, 1.0, 1.0, 0.0, 0.5);
        CHECK(j["result"] == "pass");
        CHECK(j["predicted_phase"] == "NSD");
    }
    SUBCASE("a point on a phase boundary is excluded, not failed") {
        const auto model = c.model(5.0, 0.0, c.cutoff);
        const auto s = summarize(equilibrium_dispersions(model), model.minus_mode(),
                                 model.frequencies().omega_plus, 0.0, 0.5, 5.0, 0.0);
        const double r_edge = std::abs(s.r_crit) + s.s_crit;  // NSD / SDR edge
        const auto j = verify_point(c, 5.0, r_edge, 0.0, 0.5);
        CHECK(j["result"] == kBoundaryExcluded);
    }
    SUBCASE("symmetric coupling has a constant envelope") {
        auto s = parse_config("[model]\ncoupling = symmetric\n[bath]\nmodes = 1000\n[time]\nt_max = 120\n");
        const auto j = verify_point(s, 2.0, 1.0, 0.0, 0.5);
        CHECK(j["e_amp"].get<double>() < 1e-3);
        CHECK(j["result"] == "pass");
    }
    SUBCASE("grids above 25 points are refused") {
        auto big = c;
        big.sweep.temperature = {0, 1, 2, 3, 4, 5};
        big.sweep.r = {0, 1, 2, 3, 4};
        CHECK_THROWS_AS(verify_grid(big, 1), ValidationError);
    }
}

TEST_CASE("command-line horizon override is applied before validation") {
    const std::string text = "[bath]\nmodes = 100\n[time]\nt_max = 100\n";
    CHECK_THROWS_AS(parse_config(text), ValidationError);
    CHECK(parse_config(text, "cfg.ini", true).override_horizon);
}
