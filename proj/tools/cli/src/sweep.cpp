#include "qbm_cli/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"

namespace qbm::cli {

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::jthread> threads;
        for (unsigned w = 0; w < count; ++w) threads.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

std::string status_of(const std::exception& e) {
    if (dynamic_cast<const HorizonError*>(&e)) return "horizon_error";
    if (dynamic_cast<const NumericalError*>(&e)) return "numerical_error";
    if (dynamic_cast<const ParameterRegimeError*>(&e)) return "parameter_regime_error";
    if (dynamic_cast<const ValidationError*>(&e)) return "validation_error";
    return "error";
}

Dispersions compute_dispersions(const RunConfig& config, double temperature, double c12) {
    return equilibrium_dispersions(config.model(temperature, c12, config.cutoff));
}

// --- cache ----------------------------------------------------------------------

PointCache::PointCache(std::filesystem::path dir, std::string config_digest)
    : dir_(std::move(dir)), digest_(std::move(config_digest)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path PointCache::path_for(double temperature, double c12) const {
    const std::string key = fmt::format("{}|T={}|c12={}", digest_, format_number(temperature), format_number(c12));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(key.data(), key.size(), md, &len, EVP_sha256(), nullptr);
    std::string hex;
    for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return dir_ / (hex + ".json");
}

std::optional<DispersionPoint> PointCache::load(double temperature, double c12) const {
    std::ifstream in(path_for(temperature, c12));
    if (!in) return std::nullopt;
    try {
        const auto j = nlohmann::json::parse(in);
        if (j.at("config_digest").get<std::string>() != digest_) return std::nullopt;
        DispersionPoint p;
        p.temperature = temperature;
        p.c12 = c12;
        p.status = j.at("status").get<std::string>();
        if (p.status == "ok") p.value = Dispersions{j.at("dx").get<double>(), j.at("dp").get<double>()};
        p.cached = true;
        return p;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

void PointCache::store(const DispersionPoint& point) const {
    nlohmann::json j;
    j["config_digest"] = digest_;
    j["temperature"] = point.temperature;
    j["c12"] = point.c12;
    j["status"] = point.status;
    if (point.value) {
        j["dx"] = point.value->dx;
        j["dp"] = point.value->dp;
    }
    const auto path = path_for(point.temperature, point.c12);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        out << j.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

// --- phase diagram ----------------------------------------------------------------

PhaseDiagram compute_phase_diagram(const RunConfig& config, unsigned workers, const PointCache* cache) {
    PhaseDiagram d;
    d.temperature = config.sweep.temperature;
    d.r = config.sweep.r;
    d.c12 = config.sweep.c12;
    d.purity = config.sweep.purity;

    d.points.resize(d.c12.size() * d.temperature.size());
    parallel_for(d.points.size(), workers, [&](std::size_t i) {
        const double c12 = d.c12[i / d.temperature.size()];
        const double t = d.temperature[i % d.temperature.size()];
        if (cache) {
            if (auto hit = cache->load(t, c12)) {
                d.points[i] = *hit;
                return;
            }
        }
        DispersionPoint p;
        p.temperature = t;
        p.c12 = c12;
        const auto start = std::chrono::steady_clock::now();
        try {
            p.value = compute_dispersions(config, t, c12);
        } catch (const Error& e) {
            p.status = status_of(e);
        }
        p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (cache) cache->store(p);
        d.points[i] = p;
    });

    d.rows.resize(d.c12.size() * d.purity.size() * d.temperature.size() * d.r.size());
    for (std::size_t ic = 0; ic < d.c12.size(); ++ic) {
        const FullModel model = config.model(config.temperature, d.c12[ic], config.cutoff);
        std::optional<VirtualFrequencies> freqs;
        std::string freq_status = "ok";
        try {
            freqs = model.frequencies();
        } catch (const Error& e) {
            freq_status = status_of(e);
        }
        for (std::size_t ip = 0; ip < d.purity.size(); ++ip) {
            for (std::size_t it = 0; it < d.temperature.size(); ++it) {
                const auto& pt = d.point(ic, it);
                for (std::size_t ir = 0; ir < d.r.size(); ++ir) {
                    GridRow& row = d.rows[d.index(ic, ip, it, ir)];
                    row.summary.temperature = d.temperature[it];
                    row.summary.r = d.r[ir];
                    row.summary.c12 = d.c12[ic];
                    row.summary.minus_area = d.purity[ip];
                    if (!freqs) {
                        row.status = freq_status;
                    } else if (!pt.value) {
                        row.status = pt.status;
                    } else {
                        try {
                            row.summary = summarize(*pt.value, ModeSpec(freqs->mass_minus, freqs->omega_minus),
                                                    freqs->omega_plus, d.r[ir], d.purity[ip], d.temperature[it],
                                                    d.c12[ic]);
                        } catch (const Error& e) {
                            row.status = status_of(e);
                        }
                    }
                }
            }
        }
    }
    return d;
}

std::string phase_diagram_csv(const PhaseDiagram& d) {
    std::string out = phase_summary_header() + ",status\n";
    for (const auto& row : d.rows) {
        if (row.status == "ok") {
            out += phase_summary_row(row.summary);
        } else {
            const auto& s = row.summary;
            out += fmt::format("{},{},{},{},nan,nan,nan,nan,nan,nan,NA", format_number(s.temperature),
                               format_number(s.r), format_number(s.c12), format_number(s.minus_area));
        }
        out += ',' + row.status + '\n';
    }
    return out;
}

// --- boundaries --------------------------------------------------------------------

namespace {

using Point2 = std::array<double, 2>;  // (T, r)

double nsd_margin(double r, double rc, double s) { return std::abs(std::abs(r) - std::abs(rc)) - s; }
double sd_margin(double r, double rc, double s) { return std::abs(r) + std::abs(rc) - s; }

template <class F>
double bisect(F f, double a, double b, double fa) {
    for (int i = 0; i < 60 && std::abs(b - a) > 1e-12 * std::max(1.0, std::abs(b)); ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

struct Segment {
    int a, b;  // crossing ids
};

std::vector<std::vector<Point2>> chain(const std::vector<Point2>& pts, const std::vector<Segment>& segs) {
    std::map<int, std::vector<int>> adj;  // crossing id -> segment ids
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        adj[segs[s].a].push_back(s);
        adj[segs[s].b].push_back(s);
    }
    std::vector<bool> used(segs.size(), false);
    std::vector<std::vector<Point2>> lines;
    auto walk = [&](int start_seg, int from) {
        std::vector<Point2> line{pts[from]};
        int seg = start_seg, at = from;
        while (seg >= 0 && !used[seg]) {
            used[seg] = true;
            at = segs[seg].a == at ? segs[seg].b : segs[seg].a;
            line.push_back(pts[at]);
            seg = -1;
            for (int s : adj[at]) {
                if (!used[s]) {
                    seg = s;
                    break;
                }
            }
        }
        return line;
    };
    // open chains start at crossings with a single segment
    for (const auto& [id, list] : adj) {
        if (list.size() == 1 && !used[list[0]]) lines.push_back(walk(list[0], id));
    }
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        if (!used[s]) lines.push_back(walk(s, segs[s].a));
    }
    return lines;
}

}  // namespace

nlohmann::json phase_boundaries(const RunConfig& config, const PhaseDiagram& d) {
    nlohmann::json out;
    out["config_digest"] = config.digest();
    out["axes"] = {{"x", "T"}, {"y", "r"}};
    out["slices"] = nlohmann::json::array();
    const std::size_t nt = d.temperature.size(), nr = d.r.size();

    for (std::size_t ic = 0; ic < d.c12.size(); ++ic) {
        std::optional<VirtualFrequencies> freqs;
        try {
            freqs = config.model(config.temperature, d.c12[ic], config.cutoff).frequencies();
        } catch (const Error&) {
        }
        for (std::size_t ip = 0; ip < d.purity.size(); ++ip) {
            nlohmann::json slice;
            slice["c12"] = d.c12[ic];
            slice["purity"] = d.purity[ip];
            const double purity = d.purity[ip];
            const double c12 = d.c12[ic];
            if (!freqs || nt < 2 || nr < 2) {
                slice["nsd_boundary"] = nlohmann::json::array();
                slice["sd_boundary"] = nlohmann::json::array();
                out["slices"].push_back(slice);
                continue;
            }
            const ModeSpec minus(freqs->mass_minus, freqs->omega_minus);
            auto summary_at = [&](const Dispersions& disp, double t, double r) {
                return summarize(disp, minus, freqs->omega_plus, r, purity, t, c12);
            };
            auto ok = [&](std::size_t it, std::size_t ir) {
                return d.rows[d.index(ic, ip, it, ir)].status == "ok";
            };

            for (int which = 0; which < 2; ++which) {
                auto margin = [&](const PhaseSummary& s) {
                    return which == 0 ? nsd_margin(s.r, s.r_crit, s.s_crit) : sd_margin(s.r, s.r_crit, s.s_crit);
                };
                auto node = [&](std::size_t it, std::size_t ir) { return margin(d.rows[d.index(ic, ip, it, ir)].summary); };

                std::vector<Point2> pts;
                std::map<std::pair<std::size_t, int>, int> edge_id;  // (node, dir) -> crossing id; dir 0 = +r, 1 = +T
                auto crossing = [&](std::size_t it, std::size_t ir, int dir) -> int {
                    const auto key = std::make_pair(it * nr + ir, dir);
                    if (auto f = edge_id.find(key); f != edge_id.end()) return f->second;
                    const std::size_t it2 = it + (dir == 1), ir2 = ir + (dir == 0);
                    int id = -1;
                    if (ok(it, ir) && ok(it2, ir2)) {
                        const double fa = node(it, ir), fb = node(it2, ir2);
                        if ((fa > 0.0) != (fb > 0.0)) {
                            Point2 p{};
                            if (dir == 0) {
                                const Dispersions disp = *d.point(ic, it).value;
                                const double t = d.temperature[it];
                                const double r = bisect([&](double x) { return margin(summary_at(disp, t, x)); },
                                                        d.r[ir], d.r[ir2], fa);
                                p = {t, r};
                            } else {
                                const double r = d.r[ir];
                                double t = 0.0;
                                if (config.coupling == CouplingType::Position) {
                                    try {
                                        t = bisect(
                                            [&](double x) {
                                                return margin(summary_at(compute_dispersions(config, x, c12), x, r));
                                            },
                                            d.temperature[it], d.temperature[it2], fa);
                                    } catch (const Error&) {
                                        t = d.temperature[it] + (d.temperature[it2] - d.temperature[it]) * fa / (fa - fb);
                                    }
                                } else {
                                    // symmetric: each evaluation is a full coefficient trace; interpolate
                                    t = d.temperature[it] + (d.temperature[it2] - d.temperature[it]) * fa / (fa - fb);
                                }
                                p = {t, r};
                            }
                            id = static_cast<int>(pts.size());
                            pts.push_back(p);
                        }
                    }
                    edge_id[key] = id;
                    return id;
                };

                std::vector<Segment> segs;
                for (std::size_t it = 0; it + 1 < nt; ++it) {
                    for (std::size_t ir = 0; ir + 1 < nr; ++ir) {
                        // ring order: bottom (+r at T_i), right (+T at r_j+1), top (+r at T_i+1), left (+T at r_j)
                        const int ring[4] = {crossing(it, ir, 0), crossing(it, ir + 1, 1), crossing(it + 1, ir, 0),
                                             crossing(it, ir, 1)};
                        std::vector<int> hits;
                        for (int h : ring) {
                            if (h >= 0) hits.push_back(h);
                        }
                        if (hits.size() == 2) {
                            segs.push_back({hits[0], hits[1]});
                        } else if (hits.size() == 4) {
                            segs.push_back({hits[0], hits[1]});
                            segs.push_back({hits[2], hits[3]});
                        }
                    }
                }
                nlohmann::json lines = nlohmann::json::array();
                for (const auto& line : chain(pts, segs)) {
                    nlohmann::json l = nlohmann::json::array();
                    for (const auto& p : line) l.push_back({p[0], p[1]});
                    lines.push_back(l);
                }
                slice[which == 0 ? "nsd_boundary" : "sd_boundary"] = lines;
            }
            out["slices"].push_back(slice);
        }
    }
    return out;
}

}  // namespace qbm::cli
