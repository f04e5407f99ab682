// exact_sim.hpp: exact Gaussian evolution of two oscillators coupled to a
// discretized bosonic bath. The full (N + 2)-oscillator Hamiltonian is
// diagonalized once; reduced covariances at any time follow from the
// closed-form normal-mode propagator.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qbm/bath.hpp"
#include "qbm/frequencies.hpp"
#include "qbm/gaussian.hpp"
#include "qbm/normal_modes.hpp"
#include "qbm/types.hpp"

namespace qbm {

/// System parameters as configured. Position coupling: `omega` is the target
/// oscillator frequency Omega_R and `c12` is C12 (Renormalized) or the bare
/// c12 (Bare). Symmetric coupling: `omega` is omega0 and `c12` = `c12_tilde`
/// is bare. The environment-induced shift of the x+ frequency is physical
/// here (it appears in M(t), Omega(t)), so no counterterm is applied and the
/// renormalization mode has no effect.
struct SystemParams {
    double mass{1.0};
    double omega{1.0};
    double c12{0.0};
    double c12_tilde{0.0};
};

struct FullModel {
    SystemParams system;
    CouplingType coupling{CouplingType::Position};
    Renormalization renormalization{Renormalization::Renormalized};
    DiscretizedBath bath;

    /// Throws ValidationError when coupling-type invariants are broken
    /// (position: c12_tilde = 0; symmetric: c12_tilde = c12).
    void validate() const;

    /// Bare constants entering the Hamiltonian (after counterterms).
    double bare_omega0_sq() const;
    double bare_c12() const;
    double bare_c12_tilde() const;
    /// Static bath shift of the x+ coordinate (zero for symmetric coupling).
    double frequency_shift() const;

    VirtualFrequencies frequencies() const;
    ModeSpec plus_mode() const;
    ModeSpec minus_mode() const;
};

/// Model with bath discretized from (gamma0, cutoff, N, T); the ladder
/// reference is the oscillator frequency.
FullModel make_model(const SystemParams& system, CouplingType coupling, Renormalization renorm,
                     double gamma0, double cutoff, std::size_t n_modes, double temperature);

/// Symmetric Hamiltonian form in interleaved ordering
/// (x1, p1, x2, p2, q_1, pi_1, ..., q_N, pi_N).
Eigen::MatrixXd hamiltonian_form(const FullModel& model);

/// Drift matrix A = J H of dimension 2(N + 2): d<r>/dt = A <r>.
Eigen::MatrixXd build_generator(const FullModel& model);

struct Trajectory {
    std::vector<double> times;
    std::vector<GaussianState> states;
    double validity_horizon{0.0};
};

struct EvolveOptions {
    bool override_horizon{false};
    /// Bath temperature override; defaults to model.bath.temperature.
    std::optional<double> temperature;
};

// --- initial states -----------------------------------------------------------
// All are built in the (x+, x-) basis relative to `reference` and mapped back
// through the beam splitter. x+ is always pure; `area` is dx- dp- of the x-
// mode (1/2 = pure).

/// x- squeezed by +r (dx-/dp- = e^{2r}/(m w)), x+ by -r: E_N = 2r when pure.
GaussianState two_mode_squeezed(double r, const ModeSpec& reference, double area = 0.5);
/// Coherent (displaced vacuum) states of both oscillators when pure.
GaussianState coherent_product(const ModeSpec& reference, const Vec4& mean = Vec4::Zero(), double area = 0.5);
/// Both oscillators squeezed by r: separable, with x- squeezed by r.
GaussianState squeezed_product(double r, const ModeSpec& reference, double area = 0.5);

class ExactSimulator {
public:
    explicit ExactSimulator(FullModel model);

    const FullModel& model() const noexcept { return model_; }
    const NormalModes& modes() const noexcept { return modes_; }

    /// Reduced system states on `times` (strictly increasing, >= 0).
    /// Throws HorizonError past bath.validity_horizon() unless overridden and
    /// NumericalError if a reduced state leaves the physical set.
    Trajectory evolve(const GaussianState& initial, std::span<const double> times,
                      const EvolveOptions& options = {}) const;

    /// Dense full propagator exp(A t).
    Eigen::MatrixXd propagator(double t) const;

    /// max |S J S^T - J| for S = exp(A dt).
    double symplectic_residual(double dt) const;

    /// ln det of the full covariance at time t minus ln det at t = 0; zero
    /// for a symplectic flow (total symplectic volume is conserved).
    double log_volume_drift(const GaussianState& initial, double t, double temperature) const;

private:
    Eigen::VectorXd bath_variances(double temperature) const;

    FullModel model_;
    NormalModes modes_;
};

Trajectory evolve(const FullModel& model, const GaussianState& initial, std::span<const double> times,
                  const EvolveOptions& options = {});

struct EntanglementSample {
    double t;
    double en;
};

std::vector<EntanglementSample> entanglement_trajectory(const FullModel& model, const GaussianState& initial,
                                                        std::span<const double> times,
                                                        const EvolveOptions& options = {});

/// E_N sampled uniformly on [t_end - length, t_end].
struct LateWindow {
    std::vector<double> times;
    std::vector<double> en;            // clipped at zero
    std::vector<double> en_unclipped;  // -ln(2 nu_min), may be negative
    double min{0.0};
    double max{0.0};
    double mean{0.0};
};

LateWindow late_window(const ExactSimulator& sim, const GaussianState& initial, double t_end, double length,
                       std::size_t samples, const EvolveOptions& options = {});

struct EquilibriumVariances {
    double dx_plus{0.0};
    double dp_plus{0.0};
    double settle_time{0.0};  // start of the averaging window
};

/// Equilibrium dispersions of x+ from simulation: evolves a reference state
/// (the bare thermal state of x+, vacuum of x-) and averages both variances
/// over the last full omega_- period before the validity horizon. Throws
/// HorizonError unless they drift by less than 1e-3 from the period before.
EquilibriumVariances equilibrium_variances_sim(const ExactSimulator& sim,
                                               std::optional<GaussianState> initial = std::nullopt);
EquilibriumVariances equilibrium_variances_sim(const FullModel& model);

/// CSV with header t,Exx11,Exp11,Exx12,Exp12,Epp11,Epx12,Epp12,Exx22,Exp22,Epp22,EN.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

/// Uniform grid 0, dt, 2 dt, ... up to and including t_max (within dt/2).
std::vector<double> uniform_grid(double t_max, double dt, double t_start = 0.0);

}  // namespace qbm
