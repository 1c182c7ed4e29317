#pragma once

#include <span>
#include <vector>

#include "spinphase/qstate.hpp"

namespace spinphase {

enum class ChannelKind { Dephasing, AmplitudeDamping };

// Bath attached to one qubit. `rate` is lambda for dephasing, Gamma for
// amplitude damping; `nbar` is only read by amplitude damping.
struct LocalBath {
    double rate = 1.0;
    double nbar = 0.0;
};

struct ChannelSpec {
    ChannelKind kind = ChannelKind::Dephasing;
    LocalBath a;
    LocalBath b;
    double eps_a = 1.0;
    double eps_b = 1.0;

    static ChannelSpec dephasing(double lambda);
    static ChannelSpec amplitude_damping(double gamma, double nbar, double eps = 1.0);

    bool symmetric() const noexcept;
    /// Gamma (2 nbar + 1) of qubit a (the relaxation rate of populations).
    double gamma_bar() const noexcept;
    double max_rate() const noexcept;
    /// Throws InvalidConfig on negative rates/occupations or non-positive splittings.
    void validate() const;
};

/// Fixed point used as the Spohn reference: the product Gibbs state at the
/// detailed-balance temperature for amplitude damping, I/4 for dephasing.
DensityMatrix reference_state(const ChannelSpec& spec);

/// D(rho) = D_a(rho) + D_b(rho) in the interaction picture. Accepts any 4x4
/// matrix so it can be used on intermediate integrator stages.
Matrix4c dissipator_apply(const Matrix4c& rho, const ChannelSpec& spec);

inline Matrix4c dissipator_apply(const DensityMatrix& rho, const ChannelSpec& spec) {
    return dissipator_apply(rho.matrix(), spec);
}

// Closed-form propagators for equal baths on both qubits; t >= 0.
DensityMatrix dephasing_propagate(const DensityMatrix& rho0, double lambda, double t);
DensityMatrix ad_propagate(const DensityMatrix& rho0, double gamma, double nbar, double t);

/// Dispatches to the closed-form propagator of `spec.kind`. Requires a
/// symmetric spec.
DensityMatrix propagate(const DensityMatrix& rho0, const ChannelSpec& spec, double t);

/// Fixed-step RK4 of rho' = D(rho). The step actually used is t/ceil(t/dt).
/// Requires dt <= 1e-3 / spec.max_rate(); throws StepTooLarge when the trace
/// drifts by more than 1e-8.
DensityMatrix rk4_evolve(const DensityMatrix& rho0, const ChannelSpec& spec, double t,
                         double dt);

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

/// `points` equally spaced times on [0, tmax].
std::vector<double> time_grid(double tmax, int points);

Trajectory evolve(const DensityMatrix& rho0, const ChannelSpec& spec,
                  std::span<const double> grid);

/// RK4 integration carried from grid point to grid point.
Trajectory rk4_trajectory(const DensityMatrix& rho0, const ChannelSpec& spec,
                          std::span<const double> grid, double dt);

} // namespace spinphase
