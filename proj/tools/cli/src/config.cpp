#include "qbm_cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"

namespace qbm::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"model", {"mass", "omega", "c12", "c12_tilde", "coupling", "renormalization"}},
        {"bath", {"gamma0", "cutoff", "temperature", "modes"}},
        {"initial", {"kind", "r", "purity", "covariance", "mean"}},
        {"time", {"t_max", "dt", "override_horizon"}},
        {"sweep", {"temperature", "r", "c12", "purity", "cutoff"}},
        {"output", {"dir", "plots"}},
        {"run", {"workers", "sign"}},
    };
    return s;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_double(std::string_view s) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long long> to_integer(std::string_view s) {
    const std::string t = trim(s);
    long long v = 0;
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

std::optional<bool> to_bool(std::string_view s) {
    const std::string t = trim(s);
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    return std::nullopt;
}

// "a, b, c" or "start:stop:count" (inclusive linspace)
std::optional<std::vector<double>> to_list(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    std::vector<double> out;
    if (t.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(t);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) return std::nullopt;
        const auto a = to_double(parts[0]), b = to_double(parts[1]);
        const auto n = to_integer(parts[2]);
        if (!a || !b || !n || *n < 1) return std::nullopt;
        if (*n == 1) return std::vector<double>{*a};
        for (long long i = 0; i < *n; ++i) {
            out.push_back(i + 1 == *n ? *b : *a + (*b - *a) * static_cast<double>(i) / static_cast<double>(*n - 1));
        }
        return out;
    }
    std::stringstream ss(t);
    for (std::string p; std::getline(ss, p, ',');) {
        const auto v = to_double(p);
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    return out;
}

class Reader {
public:
    Reader(const pt::ptree& tree, std::vector<std::string>& errors) : tree_(tree), errors_(errors) {}

    const pt::ptree* raw(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return nullptr;
        const auto v = sec->get_child_optional(pt::ptree::path_type(key, '\0'));
        return v ? &*v : nullptr;
    }
    bool has(const std::string& section, const std::string& key) const { return raw(section, key) != nullptr; }

    template <class T, class F>
    void read(const std::string& section, const std::string& key, T& target, F convert, const char* expected) {
        const auto* v = raw(section, key);
        if (!v) return;
        const auto parsed = convert(v->data());
        if (!parsed) {
            errors_.push_back(fmt::format("[{}] {} = '{}': expected {}", section, key, v->data(), expected));
            return;
        }
        target = static_cast<T>(*parsed);
    }
    void number(const std::string& s, const std::string& k, double& t) { read(s, k, t, to_double, "a number"); }
    void list(const std::string& s, const std::string& k, std::vector<double>& t) {
        read(s, k, t, to_list, "a list 'a, b, ...' or a range 'start:stop:count'");
    }
    std::string text(const std::string& s, const std::string& k, const std::string& fallback) const {
        const auto* v = raw(s, k);
        return v ? trim(v->data()) : fallback;
    }

private:
    const pt::ptree& tree_;
    std::vector<std::string>& errors_;
};

InitialKind parse_kind(std::string_view s) {
    if (s == "two-mode-squeezed") return InitialKind::TwoModeSqueezed;
    if (s == "coherent-product") return InitialKind::CoherentProduct;
    if (s == "squeezed-product") return InitialKind::SqueezedProduct;
    if (s == "explicit-covariance") return InitialKind::ExplicitCovariance;
    throw ValidationError(fmt::format("unknown initial kind '{}'", s));
}

void collect_invariants(const RunConfig& c, std::vector<std::string>& errors) {
    auto need = [&](bool ok, std::string msg) {
        if (!ok) errors.push_back(std::move(msg));
    };
    need(c.mass > 0.0, "[model] mass must be positive");
    need(c.omega > 0.0, "[model] omega must be positive");
    need(c.gamma0 >= 0.0, "[bath] gamma0 must be non-negative");
    need(c.cutoff > 0.0, "[bath] cutoff must be positive");
    need(c.temperature >= 0.0, "[bath] temperature must be non-negative");
    need(c.t_max > 0.0, "[time] t_max must be positive");
    need(c.dt > 0.0, "[time] dt must be positive");
    need(c.initial.purity >= 0.5, "[initial] purity (dx- dp-) must be at least 1/2");
    need(c.sign == 1 || c.sign == -1, "[run] sign must be +1 or -1");
    if (c.coupling == CouplingType::Position) {
        need(c.c12_tilde == 0.0, "[model] c12_tilde must be 0 for position coupling");
    } else {
        need(c.c12_tilde == c.c12, "[model] c12_tilde must equal c12 for symmetric coupling");
    }
    const auto& s = c.sweep;
    need(!s.temperature.empty() && !s.r.empty() && !s.c12.empty() && !s.purity.empty() && !s.cutoff.empty(),
         "[sweep] axes must be non-empty");
    for (double t : s.temperature) need(t >= 0.0, fmt::format("[sweep] temperature {} is negative", t));
    for (double p : s.purity) need(p >= 0.5, fmt::format("[sweep] purity {} is below 1/2", p));
    for (double l : s.cutoff) {
        need(l > 0.0, fmt::format("[sweep] cutoff {} is not positive", l));
        if (!(l > 0.0) || !(c.dt > 0.0)) continue;
        need(c.dt * l <= 0.1 * (1.0 + 1e-12),
             fmt::format("[time] dt * cutoff = {:.6g} exceeds 0.1 (dt = {}, cutoff = {})", c.dt * l, c.dt, l));
        const double horizon = std::numbers::pi * static_cast<double>(c.modes) / l;
        need(c.override_horizon || c.t_max <= horizon * (1.0 + 1e-12),
             fmt::format("[time] t_max = {} exceeds the validity horizon T_rec/2 = {:.6g} (N = {}, cutoff = {}); "
                         "raise [bath] modes or set override_horizon",
                         c.t_max, horizon, c.modes, l));
    }
    if (c.initial.kind == InitialKind::ExplicitCovariance) {
        if (c.initial.covariance.size() != 16) {
            errors.push_back("[initial] covariance needs 16 entries (row-major 4x4)");
        } else {
            try {
                Mat4 v = Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>>(c.initial.covariance.data());
                GaussianState st(Vec4::Zero(), v);
                (void)st;
            } catch (const Error& e) {
                errors.push_back(fmt::format("[initial] covariance: {}", e.what()));
            }
        }
    }
    need(c.initial.mean.empty() || c.initial.mean.size() == 4, "[initial] mean needs 4 entries");
}

void throw_if(const std::vector<std::string>& errors, const std::string& origin) {
    if (errors.empty()) return;
    std::string msg = fmt::format("{}: {} configuration error{}", origin, errors.size(), errors.size() == 1 ? "" : "s");
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ValidationError(msg);
}

}  // namespace

std::string_view to_string(InitialKind kind) {
    switch (kind) {
        case InitialKind::TwoModeSqueezed: return "two-mode-squeezed";
        case InitialKind::CoherentProduct: return "coherent-product";
        case InitialKind::SqueezedProduct: return "squeezed-product";
        case InitialKind::ExplicitCovariance: return "explicit-covariance";
    }
    return "?";
}

RunConfig parse_config(const std::string& text, const std::string& origin, bool override_horizon) {
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(fmt::format("{}:{}: {}", origin, e.line(), e.message()));
    }

    std::vector<std::string> errors;
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (it == schema().end()) {
            if (body.empty()) {
                errors.push_back(fmt::format("key '{}' outside any section", section));
            } else {
                errors.push_back(fmt::format("unknown section [{}]", section));
            }
            continue;
        }
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) errors.push_back(fmt::format("unknown key '{}' in [{}]", key, section));
        }
    }

    RunConfig c;
    Reader rd(tree, errors);
    rd.number("model", "mass", c.mass);
    rd.number("model", "omega", c.omega);
    rd.number("model", "c12", c.c12);
    try {
        c.coupling = parse_coupling(rd.text("model", "coupling", "position"));
    } catch (const ValidationError& e) {
        errors.push_back(fmt::format("[model] coupling: {}", e.what()));
    }
    try {
        c.renormalization = parse_renormalization(rd.text("model", "renormalization", "renormalized"));
    } catch (const ValidationError& e) {
        errors.push_back(fmt::format("[model] renormalization: {}", e.what()));
    }
    c.c12_tilde = c.coupling == CouplingType::Symmetric ? c.c12 : 0.0;
    rd.number("model", "c12_tilde", c.c12_tilde);

    rd.number("bath", "gamma0", c.gamma0);
    rd.number("bath", "cutoff", c.cutoff);
    rd.number("bath", "temperature", c.temperature);
    long long modes = static_cast<long long>(c.modes);
    rd.read("bath", "modes", modes, to_integer, "a positive integer");
    if (modes < 1) errors.push_back("[bath] modes must be at least 1");
    c.modes = static_cast<std::size_t>(std::max(1LL, modes));

    try {
        c.initial.kind = parse_kind(rd.text("initial", "kind", "two-mode-squeezed"));
    } catch (const ValidationError& e) {
        errors.push_back(fmt::format("[initial] {}", e.what()));
    }
    rd.number("initial", "r", c.initial.r);
    rd.number("initial", "purity", c.initial.purity);
    rd.list("initial", "covariance", c.initial.covariance);
    rd.list("initial", "mean", c.initial.mean);

    rd.number("time", "t_max", c.t_max);
    rd.number("time", "dt", c.dt);
    rd.read("time", "override_horizon", c.override_horizon, to_bool, "true or false");
    c.override_horizon = c.override_horizon || override_horizon;

    c.sweep.temperature = {c.temperature};
    c.sweep.r = {c.initial.r};
    c.sweep.c12 = {c.c12};
    c.sweep.purity = {c.initial.purity};
    c.sweep.cutoff = {c.cutoff};
    rd.list("sweep", "temperature", c.sweep.temperature);
    rd.list("sweep", "r", c.sweep.r);
    rd.list("sweep", "c12", c.sweep.c12);
    rd.list("sweep", "purity", c.sweep.purity);
    rd.list("sweep", "cutoff", c.sweep.cutoff);

    c.out_dir = rd.text("output", "dir", "out");
    rd.read("output", "plots", c.plots, to_bool, "true or false");
    long long workers = 0;
    rd.read("run", "workers", workers, to_integer, "a non-negative integer");
    if (workers < 0) errors.push_back("[run] workers must be non-negative");
    c.workers = static_cast<unsigned>(std::max(0LL, workers));
    rd.read("run", "sign", c.sign, to_integer, "+1 or -1");

    collect_invariants(c, errors);
    throw_if(errors, origin);
    return c;
}

RunConfig load_config(const std::filesystem::path& path, bool override_horizon) {
    std::ifstream in(path);
    if (!in) throw ValidationError(fmt::format("cannot open config file '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), override_horizon);
}

void validate(const RunConfig& config) {
    std::vector<std::string> errors;
    collect_invariants(config, errors);
    throw_if(errors, "configuration");
}

FullModel RunConfig::model(double temp, double c12_value, double cutoff_value) const {
    SystemParams sys{mass, omega, c12_value, coupling == CouplingType::Symmetric ? c12_value : 0.0};
    return make_model(sys, coupling, renormalization, gamma0, cutoff_value, modes, temp);
}

GaussianState RunConfig::initial_state(const FullModel& m, double r, double purity) const {
    const ModeSpec ref = m.minus_mode();
    Vec4 mean = Vec4::Zero();
    if (initial.mean.size() == 4) mean = Eigen::Map<const Vec4>(initial.mean.data());
    switch (initial.kind) {
        case InitialKind::TwoModeSqueezed: {
            const auto s = two_mode_squeezed(r, ref, purity);
            return GaussianState(mean, s.cov());
        }
        case InitialKind::CoherentProduct: return coherent_product(ref, mean, purity);
        case InitialKind::SqueezedProduct: {
            const auto s = squeezed_product(r, ref, purity);
            return GaussianState(mean, s.cov());
        }
        case InitialKind::ExplicitCovariance: {
            Mat4 v = Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>>(initial.covariance.data());
            return GaussianState(mean, v);
        }
    }
    throw ValidationError("unknown initial kind");
}

std::string RunConfig::canonical() const {
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
        return s;
    };
    std::string out;
    out += fmt::format("version={}\n", QBM_VERSION_STRING);
    out += fmt::format("model.mass={}\nmodel.omega={}\nmodel.c12={}\nmodel.c12_tilde={}\n", format_number(mass),
                       format_number(omega), format_number(c12), format_number(c12_tilde));
    out += fmt::format("model.coupling={}\nmodel.renormalization={}\n", qbm::to_string(coupling),
                       qbm::to_string(renormalization));
    out += fmt::format("bath.gamma0={}\nbath.cutoff={}\nbath.temperature={}\nbath.modes={}\n", format_number(gamma0),
                       format_number(cutoff), format_number(temperature), modes);
    out += fmt::format("initial.kind={}\ninitial.r={}\ninitial.purity={}\ninitial.covariance={}\ninitial.mean={}\n",
                       to_string(initial.kind), format_number(initial.r), format_number(initial.purity),
                       list(initial.covariance), list(initial.mean));
    out += fmt::format("time.t_max={}\ntime.dt={}\ntime.override_horizon={}\n", format_number(t_max),
                       format_number(dt), override_horizon);
    out += fmt::format("sweep.temperature={}\nsweep.r={}\nsweep.c12={}\nsweep.purity={}\nsweep.cutoff={}\n",
                       list(sweep.temperature), list(sweep.r), list(sweep.c12), list(sweep.purity),
                       list(sweep.cutoff));
    out += fmt::format("run.sign={}\n", sign);
    return out;
}

std::string RunConfig::digest() const {
    const std::string text = canonical();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::string hex;
    for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QBM_WORKERS")) {
        if (const auto v = to_integer(env); v && *v > 0) return static_cast<unsigned>(*v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace qbm::cli
