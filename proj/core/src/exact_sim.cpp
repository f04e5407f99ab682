#include "qbm/exact_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/format.h>

#include "qbm/csv.hpp"
#include "qbm/errors.hpp"

namespace qbm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr Index kBatch = 64;

double sq(double x) { return x * x; }

}  // namespace

// --- FullModel ----------------------------------------------------------------

void FullModel::validate() const {
    if (!(system.mass > 0.0) || !(system.omega > 0.0)) {
        throw ValidationError(fmt::format("system needs mass > 0 and omega > 0 (got {}, {})", system.mass, system.omega));
    }
    if (bath.size() == 0) throw ValidationError("bath has no modes");
    if (coupling == CouplingType::Position && system.c12_tilde != 0.0) {
        throw ValidationError("position coupling requires c12_tilde = 0");
    }
    if (coupling == CouplingType::Symmetric && system.c12_tilde != system.c12) {
        throw ValidationError("symmetric coupling requires c12_tilde = c12");
    }
    if (bath.density.mass != system.mass) throw ValidationError("bath density mass differs from the system mass");
}

double FullModel::frequency_shift() const {
    return coupling == CouplingType::Position ? bath.static_shift() : 0.0;
}

double FullModel::bare_omega0_sq() const {
    if (coupling == CouplingType::Symmetric) return sq(system.omega);
    return sq(system.omega) - 0.5 * frequency_shift();
}

double FullModel::bare_c12() const {
    if (coupling == CouplingType::Position && renormalization == Renormalization::Renormalized) {
        return system.c12 - 0.5 * frequency_shift();
    }
    return system.c12;
}

double FullModel::bare_c12_tilde() const { return coupling == CouplingType::Symmetric ? system.c12_tilde : 0.0; }

VirtualFrequencies FullModel::frequencies() const {
    if (coupling == CouplingType::Symmetric) {
        return renormalized_frequencies(system.omega, system.c12, 0.0, coupling, system.mass);
    }
    return renormalized_frequencies(std::sqrt(bare_omega0_sq()), bare_c12(), frequency_shift(), coupling, system.mass);
}

ModeSpec FullModel::plus_mode() const {
    const auto f = frequencies();
    return {f.mass_plus, f.omega_plus};
}

ModeSpec FullModel::minus_mode() const {
    const auto f = frequencies();
    return {f.mass_minus, f.omega_minus};
}

FullModel make_model(const SystemParams& system, CouplingType coupling, Renormalization renorm, double gamma0,
                     double cutoff, std::size_t n_modes, double temperature) {
    FullModel model;
    model.system = system;
    model.coupling = coupling;
    model.renormalization = renorm;
    model.bath = discretize(OhmicSpectralDensity(gamma0, cutoff, system.mass), n_modes, temperature, system.omega);
    model.validate();
    return model;
}

MatrixXd hamiltonian_form(const FullModel& model) {
    model.validate();
    const Index nb = static_cast<Index>(model.bath.size());
    const Index dim = 2 * (nb + 2);
    const double m = model.system.mass;
    const double w0sq = model.bare_omega0_sq();
    if (!(w0sq > 0.0)) {
        throw ParameterRegimeError(fmt::format("bare squared frequency {:.6g} is not positive", w0sq));
    }
    const double w0 = std::sqrt(w0sq);
    MatrixXd h = MatrixXd::Zero(dim, dim);
    for (Index i : {0, 2}) {
        h(i, i) = m * w0sq;
        h(i + 1, i + 1) = 1.0 / m;
    }
    h(0, 2) = h(2, 0) = m * model.bare_c12();
    h(1, 3) = h(3, 1) = model.bare_c12_tilde() / (m * w0sq);

    const double inv_root2 = 1.0 / std::numbers::sqrt2;
    for (Index k = 0; k < nb; ++k) {
        const double mk = model.bath.masses[k];
        const double wk = model.bath.frequencies[k];
        const Index q = 4 + 2 * k;
        h(q, q) = mk * wk * wk;
        h(q + 1, q + 1) = 1.0 / mk;
        double ck = 0.0;
        if (model.coupling == CouplingType::Position) {
            ck = model.bath.position_couplings[k];
        } else {
            // g (a b^dagger + a^dagger b) written in x+, p+, q_k, pi_k
            ck = model.bath.ladder_couplings[k] * std::sqrt(m * w0 * mk * wk);
            const double cp = ck * inv_root2 / (m * w0 * mk * wk);
            h(1, q + 1) = h(q + 1, 1) = cp;
            h(3, q + 1) = h(q + 1, 3) = cp;
        }
        h(0, q) = h(q, 0) = ck * inv_root2;
        h(2, q) = h(q, 2) = ck * inv_root2;
    }
    return h;
}

MatrixXd build_generator(const FullModel& model) {
    const MatrixXd h = hamiltonian_form(model);
    return symplectic_form(h.rows() / 2) * h;
}

// --- initial states -----------------------------------------------------------

namespace {

GaussianState virtual_product(double r_plus, double r_minus, const ModeSpec& reference, double area, const Vec4& mean) {
    const auto [dxp, dpp] = squeezed_dispersions(r_plus, 0.5, reference);
    const auto [dxm, dpm] = squeezed_dispersions(r_minus, area, reference);
    return GaussianState(mean, beam_splitter(product_covariance(diagonal_mode(dxp, dpp), diagonal_mode(dxm, dpm))));
}

}  // namespace

GaussianState two_mode_squeezed(double r, const ModeSpec& reference, double area) {
    return virtual_product(-r, r, reference, area, Vec4::Zero());
}

GaussianState coherent_product(const ModeSpec& reference, const Vec4& mean, double area) {
    return virtual_product(0.0, 0.0, reference, area, mean);
}

GaussianState squeezed_product(double r, const ModeSpec& reference, double area) {
    return virtual_product(r, r, reference, area, Vec4::Zero());
}

// --- ExactSimulator -----------------------------------------------------------

ExactSimulator::ExactSimulator(FullModel model) : model_(std::move(model)) {
    modes_ = normal_modes(hamiltonian_form(model_));
}

VectorXd ExactSimulator::bath_variances(double temperature) const {
    const auto& b = model_.bath;
    VectorXd v(2 * b.size());
    for (std::size_t k = 0; k < b.size(); ++k) {
        const double mw = b.masses[k] * b.frequencies[k];
        const double e = thermal_occupation(b.frequencies[k], temperature) + 0.5;
        v(2 * k) = e / mw;
        v(2 * k + 1) = e * mw;
    }
    return v;
}

Trajectory ExactSimulator::evolve(const GaussianState& initial, std::span<const double> times,
                                  const EvolveOptions& options) const {
    Trajectory out;
    out.validity_horizon = model_.bath.validity_horizon();
    if (times.empty()) return out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0 || (i > 0 && times[i] <= times[i - 1])) {
            throw ValidationError("time grid must be finite, non-negative and strictly increasing");
        }
    }
    if (!options.override_horizon && times.back() > out.validity_horizon * (1.0 + 1e-12)) {
        throw HorizonError(fmt::format("t = {:.6g} exceeds the validity horizon T_rec/2 = {:.6g}; increase N or "
                                       "set the horizon override",
                                       times.back(), out.validity_horizon),
                           out.validity_horizon);
    }
    const double temperature = options.temperature.value_or(model_.bath.temperature);

    const MatrixXd& from = modes_.from_phys;
    const Index dim = from.rows();

    // Initial covariance in normal coordinates: W = F V0 F^T, V0 block diagonal.
    MatrixXd fv(dim, dim);
    fv.leftCols(4).noalias() = from.leftCols(4) * initial.cov();
    fv.rightCols(dim - 4) = from.rightCols(dim - 4) * bath_variances(temperature).asDiagonal();
    MatrixXd w(dim, dim);
    w.noalias() = fv * from.transpose();
    const VectorXd z0 = from.leftCols(4) * initial.mean();
    const MatrixXd sys_rows = modes_.to_phys.topRows(4);

    out.times.assign(times.begin(), times.end());
    out.states.reserve(times.size());
    MatrixXd a(4 * kBatch, dim), aw(4 * kBatch, dim);
    for (std::size_t start = 0; start < times.size(); start += kBatch) {
        const Index nb = static_cast<Index>(std::min<std::size_t>(kBatch, times.size() - start));
        for (Index b = 0; b < nb; ++b) {
            a.middleRows(4 * b, 4) = sys_rows;
            rotate_columns(a.middleRows(4 * b, 4), modes_.frequencies, times[start + b]);
        }
        aw.topRows(4 * nb).noalias() = a.topRows(4 * nb) * w;
        for (Index b = 0; b < nb; ++b) {
            Mat4 v = aw.middleRows(4 * b, 4) * a.middleRows(4 * b, 4).transpose();
            v = 0.5 * (v + v.transpose()).eval();
            const Vec4 mean = a.middleRows(4 * b, 4) * z0;
            const double margin = uncertainty_margin(v);
            if (margin < -kPhysicalityTol) {
                throw NumericalError(fmt::format("reduced state unphysical at t = {:.6g} (margin {:.3e})",
                                                 times[start + b], margin),
                                     margin);
            }
            out.states.emplace_back(mean, v);
        }
    }
    return out;
}

MatrixXd ExactSimulator::propagator(double t) const { return qbm::propagator(modes_, t); }

double ExactSimulator::symplectic_residual(double dt) const {
    const MatrixXd s = propagator(dt);
    const MatrixXd j = symplectic_form(s.rows() / 2);
    return (s * j * s.transpose() - j).cwiseAbs().maxCoeff();
}

double ExactSimulator::log_volume_drift(const GaussianState& initial, double t, double temperature) const {
    const Index dim = modes_.from_phys.rows();
    MatrixXd v0 = MatrixXd::Zero(dim, dim);
    v0.topLeftCorner(4, 4) = initial.cov();
    v0.diagonal().tail(dim - 4) = bath_variances(temperature);
    const MatrixXd s = propagator(t);
    const MatrixXd vt = s * v0 * s.transpose();
    auto logdet = [](const MatrixXd& m) {
        Eigen::LLT<MatrixXd> llt(0.5 * (m + m.transpose()));
        if (llt.info() != Eigen::Success) throw NumericalError("full covariance lost positive definiteness", 0.0);
        return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    };
    return logdet(vt) - logdet(v0);
}

Trajectory evolve(const FullModel& model, const GaussianState& initial, std::span<const double> times,
                  const EvolveOptions& options) {
    return ExactSimulator(model).evolve(initial, times, options);
}

std::vector<EntanglementSample> entanglement_trajectory(const FullModel& model, const GaussianState& initial,
                                                        std::span<const double> times,
                                                        const EvolveOptions& options) {
    const Trajectory tr = evolve(model, initial, times, options);
    std::vector<EntanglementSample> out;
    out.reserve(tr.times.size());
    for (std::size_t i = 0; i < tr.times.size(); ++i) out.push_back({tr.times[i], log_negativity(tr.states[i])});
    return out;
}

LateWindow late_window(const ExactSimulator& sim, const GaussianState& initial, double t_end, double length,
                       std::size_t samples, const EvolveOptions& options) {
    if (samples < 2 || !(length > 0.0) || !(t_end > length)) {
        throw ValidationError("late window needs at least 2 samples and 0 < length < t_end");
    }
    LateWindow w;
    w.times.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        w.times[i] = t_end - length + length * static_cast<double>(i) / static_cast<double>(samples - 1);
    }
    const Trajectory tr = sim.evolve(initial, w.times, options);
    for (const auto& st : tr.states) {
        const double e = log_negativity_unclipped(st.cov());
        w.en_unclipped.push_back(e);
        w.en.push_back(std::max(0.0, e));
    }
    w.min = *std::min_element(w.en.begin(), w.en.end());
    w.max = *std::max_element(w.en.begin(), w.en.end());
    double sum = 0.0;
    for (double e : w.en) sum += e;
    w.mean = sum / static_cast<double>(samples);
    return w;
}

// --- equilibrium ----------------------------------------------------------------

EquilibriumVariances equilibrium_variances_sim(const ExactSimulator& sim, std::optional<GaussianState> initial) {
    const FullModel& model = sim.model();
    if (!(model.bath.density.gamma0 > 0.0)) throw ValidationError("equilibrium needs gamma0 > 0");
    const auto f = model.frequencies();
    if (!initial) {
        const ModeSpec plus(f.mass_plus, f.omega_plus);
        const ModeSpec minus(f.mass_minus, f.omega_minus);
        const double n = model.bath.temperature > 0.0 ? thermal_occupation(f.omega_plus, model.bath.temperature) : 0.0;
        const auto [dx, dp] = squeezed_dispersions(0.0, 0.5, minus);
        initial = GaussianState(beam_splitter(product_covariance(thermal_mode(n, plus), diagonal_mode(dx, dp))));
    }

    const double horizon = model.bath.validity_horizon();
    const double window = 2.0 * std::numbers::pi / f.omega_minus;
    const double t_min = std::min(4.0 / model.bath.density.gamma0, 0.5 * horizon);
    constexpr int kSamples = 64;
    const int n_windows = static_cast<int>(std::floor((horizon - t_min) / window));
    if (n_windows < 2) {
        throw HorizonError(fmt::format("equilibrium window {:.4g} does not fit before the horizon {:.4g}; increase N",
                                       window, horizon),
                           horizon);
    }
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(n_windows) * kSamples);
    for (int k = 0; k < n_windows; ++k) {
        for (int s = 0; s < kSamples; ++s) times.push_back(t_min + window * (k + (s + 0.5) / kSamples));
    }
    const Trajectory tr = sim.evolve(*initial, times);

    std::vector<std::pair<double, double>> avg(n_windows, {0.0, 0.0});
    for (int k = 0; k < n_windows; ++k) {
        for (int s = 0; s < kSamples; ++s) {
            const Mat4 v = beam_splitter(tr.states[static_cast<std::size_t>(k * kSamples + s)].cov());
            avg[k].first += v(0, 0) / kSamples;
            avg[k].second += v(1, 1) / kSamples;
        }
    }
    // Slow relaxations (symmetric coupling) can pass the drift test long
    // before they are done, so the last window is reported once settled.
    const int last = n_windows - 1;
    const double dx_drift = std::abs(avg[last].first - avg[last - 1].first) / avg[last].first;
    const double dp_drift = std::abs(avg[last].second - avg[last - 1].second) / avg[last].second;
    if (dx_drift < 1e-3 && dp_drift < 1e-3) {
        return {std::sqrt(avg[last].first), std::sqrt(avg[last].second), t_min + window * last};
    }
    throw HorizonError("equilibrium variances did not settle before the validity horizon; increase N", horizon);
}

EquilibriumVariances equilibrium_variances_sim(const FullModel& model) {
    return equilibrium_variances_sim(ExactSimulator(model));
}

// --- output -----------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    os << "t,Exx11,Exp11,Exx12,Exp12,Epp11,Epx12,Epp12,Exx22,Exp22,Epp22,EN\n";
    for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
        const Mat4& v = trajectory.states[i].cov();
        const double cols[] = {v(0, 0), v(0, 1), v(0, 2), v(0, 3), v(1, 1), v(1, 2),
                               v(1, 3), v(2, 2), v(2, 3), v(3, 3), log_negativity(trajectory.states[i])};
        os << format_number(trajectory.times[i]);
        for (double c : cols) os << ',' << format_number(c);
        os << '\n';
    }
}

std::vector<double> uniform_grid(double t_max, double dt, double t_start) {
    if (!(dt > 0.0) || !(t_max >= t_start)) throw ValidationError("grid needs dt > 0 and t_max >= t_start");
    const auto n = static_cast<std::size_t>(std::floor((t_max - t_start) / dt + 0.5));
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out[i] = t_start + static_cast<double>(i) * dt;
    return out;
}

}  // namespace qbm
