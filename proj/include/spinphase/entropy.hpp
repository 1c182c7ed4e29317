#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "spinphase/channels.hpp"
#include "spinphase/phasespace.hpp"
#include "spinphase/qstate.hpp"

namespace spinphase {

/// Spin of each subsystem. The state layer only builds qubits.
inline constexpr double kSpin = 0.5;

/// Integrands dividing by Q drop samples with Q below this floor.
inline constexpr double kQFloor = 1e-12;

/// Wehrl entropy -((2J+1)/(4 pi))^2 \int Q ln Q dOmega.
MCEstimate wehrl_entropy(const DensityMatrix& rho, const MCConfig& cfg);

/// Entropy production rate of local dephasing at rate lambda on each qubit:
/// sum_j lambda/2 ((2J+1)/(4 pi))^2 \int (d_phi_j Q)^2 / Q dOmega.
MCEstimate pi_dephasing(const DensityMatrix& rho, double lambda, const MCConfig& cfg);

/// Entropy production rate of local thermal amplitude damping (rate gamma,
/// bath occupation nbar) on each qubit.
MCEstimate pi_ad(const DensityMatrix& rho, double gamma, double nbar, const MCConfig& cfg);

/// Entropy flux rate to the local baths of the amplitude-damping channel.
MCEstimate phi_ad(const DensityMatrix& rho, double gamma, double nbar, const MCConfig& cfg);

/// Per-sample values of the Pi, Phi and S_Q integrands (measure factor
/// excluded: the integrals are (4 pi)^2 times their mean). Phi is zero for
/// dephasing. std::nullopt when Q is below kQFloor.
std::optional<std::array<double, 3>> rate_integrands(const HusimiSample& s, const PhasePoint& p,
                                                     const ChannelSpec& spec);

struct EntropyRates {
    MCEstimate pi;
    MCEstimate phi;
    MCEstimate wehrl;
};

/// Pi, Phi and S_Q from a single pass over the shared sample stream.
EntropyRates entropy_rates(const DensityMatrix& rho, const ChannelSpec& spec, const MCConfig& cfg);

/// entropy_rates for many states at once; element k equals
/// entropy_rates(states[k], spec, cfg) bit for bit.
std::vector<EntropyRates> entropy_rates_batch(std::span<const DensityMatrix> states,
                                              const ChannelSpec& spec, const MCConfig& cfg);

/// Spohn rate -d/dt S(rho || rho_eq) = -Tr[D(rho) (ln rho - ln rho_eq)].
/// Throws SingularReference if rho_eq is rank deficient; returns +infinity if
/// rho itself is (the rate diverges there).
double pi_von_neumann(const DensityMatrix& rho, const ChannelSpec& spec, const DensityMatrix& rho_eq);

/// One time-grid row.
struct EntropyRecord {
    double t = 0.0;
    double pi = 0.0;
    double pi_stderr = 0.0;
    double phi = 0.0;
    double phi_stderr = 0.0;
    double wehrl = 0.0;
    double wehrl_stderr = 0.0;
    double pi_vn = 0.0;
    double c_l1 = 0.0;
    double c_rel = 0.0;
    double discarded_fraction = 0.0;
};

EntropyRecord entropy_record(double t, const DensityMatrix& rho, const ChannelSpec& spec,
                             const MCConfig& cfg);

/// Every state of the trajectory is estimated on the same sample stream.
std::vector<EntropyRecord> entropy_curve(const Trajectory& trajectory, const ChannelSpec& spec,
                                         const MCConfig& cfg);

/// Several trajectories in one pass over the samples.
std::vector<std::vector<EntropyRecord>> entropy_curves(std::span<const Trajectory> trajectories,
                                                       const ChannelSpec& spec, const MCConfig& cfg);

} // namespace spinphase
