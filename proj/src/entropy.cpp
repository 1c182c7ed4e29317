#include "spinphase/entropy.hpp"

#include <cmath>
#include <limits>

#include "spinphase/errors.hpp"

namespace spinphase {

namespace {

constexpr Subsystem kBoth[] = {Subsystem::A, Subsystem::B};

const LocalBath& bath_of(const ChannelSpec& spec, Subsystem j) {
    return j == Subsystem::A ? spec.a : spec.b;
}

// (2JQ sin t + [cos t - N] d_t Q)^2 / (N - cos t) + (d_phi Q / sin t)^2 (N cos t - 1) cos t,
// still to be divided by Q.
double ad_production_numerator(const HusimiSample& s, const SphereCoord& c, double n_eff,
                               Subsystem j) {
    const double gap = n_eff - c.cos_theta;
    const double damp = 2.0 * kSpin * s.q * c.sin_theta - gap * s.d_theta(j);
    const double h = s.dphi_over_sin(j);
    return damp * damp / gap + h * h * (n_eff * c.cos_theta - 1.0) * c.cos_theta;
}

double ad_flux(const HusimiSample& s, const SphereCoord& c, double n_eff, Subsystem j) {
    return 2.0 * kSpin * s.q * c.sin_theta * c.sin_theta / (n_eff - c.cos_theta) -
           c.sin_theta * s.d_theta(j);
}

} // namespace

std::optional<std::array<double, 3>> rate_integrands(const HusimiSample& s, const PhasePoint& p,
                                                     const ChannelSpec& spec) {
    if (s.q < kQFloor) return std::nullopt;
    const double norm = phase_space_norm(kSpin);
    double pi = 0.0;
    double phi = 0.0;
    for (Subsystem j : kBoth) {
        const LocalBath& bath = bath_of(spec, j);
        if (spec.kind == ChannelKind::Dephasing) {
            const double jz = current_jz(s, j);
            pi += 0.5 * bath.rate * norm * jz * jz / s.q;
        } else {
            const double n_eff = 2.0 * bath.nbar + 1.0;
            const SphereCoord& c = p[j];
            pi += 0.5 * bath.rate * norm * ad_production_numerator(s, c, n_eff, j) / s.q;
            phi += kSpin * bath.rate * norm * ad_flux(s, c, n_eff, j);
        }
    }
    const double wehrl = -norm * s.q * std::log(s.q);
    return std::array<double, 3>{pi, phi, wehrl};
}

EntropyRates entropy_rates(const DensityMatrix& rho, const ChannelSpec& spec, const MCConfig& cfg) {
    return entropy_rates_batch(std::span(&rho, 1), spec, cfg)[0];
}

std::vector<EntropyRates> entropy_rates_batch(std::span<const DensityMatrix> states,
                                              const ChannelSpec& spec, const MCConfig& cfg) {
    const auto est = mc_integrate_batch<3>(
        states.size(),
        [&](std::size_t k, const PhasePoint& p) {
            return rate_integrands(husimi(states[k].matrix(), p), p, spec);
        },
        cfg);
    std::vector<EntropyRates> out;
    out.reserve(est.size());
    for (const auto& e : est) out.push_back({e[0], e[1], e[2]});
    return out;
}

MCEstimate wehrl_entropy(const DensityMatrix& rho, const MCConfig& cfg) {
    const Matrix4c& m = rho.matrix();
    const double norm = phase_space_norm(kSpin);
    return mc_integrate(
        [&](const PhasePoint& p) -> std::optional<double> {
            const double q = husimi(m, p).q;
            if (q < kQFloor) return std::nullopt;  // q ln q -> 0
            return -norm * q * std::log(q);
        },
        cfg);
}

MCEstimate pi_dephasing(const DensityMatrix& rho, double lambda, const MCConfig& cfg) {
    return entropy_rates(rho, ChannelSpec::dephasing(lambda), cfg).pi;
}

MCEstimate pi_ad(const DensityMatrix& rho, double gamma, double nbar, const MCConfig& cfg) {
    return entropy_rates(rho, ChannelSpec::amplitude_damping(gamma, nbar), cfg).pi;
}

MCEstimate phi_ad(const DensityMatrix& rho, double gamma, double nbar, const MCConfig& cfg) {
    return entropy_rates(rho, ChannelSpec::amplitude_damping(gamma, nbar), cfg).phi;
}

double pi_von_neumann(const DensityMatrix& rho, const ChannelSpec& spec,
                      const DensityMatrix& rho_eq) {
    const Eigen::SelfAdjointEigenSolver<Matrix4c> eq(rho_eq.matrix());
    if (eq.eigenvalues().minCoeff() < 1e-14)
        throw SingularReference("von Neumann production: reference state is rank deficient");
    const Matrix4c log_eq = eq.eigenvectors() *
                            eq.eigenvalues().array().log().matrix().cast<Complex>().asDiagonal() *
                            eq.eigenvectors().adjoint();
    const Matrix4c d = dissipator_apply(rho, spec);

    // Tr[D ln rho] in the eigenbasis of rho. A zero eigenvalue whose
    // population is being fed makes the rate diverge.
    const Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho.matrix());
    double d_log_rho = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double flow = (es.eigenvectors().col(i).adjoint() * d * es.eigenvectors().col(i))(0, 0).real();
        const double lambda = es.eigenvalues()[i];
        if (lambda < 1e-14) {
            if (std::abs(flow) > 1e-14) return std::numeric_limits<double>::infinity();
            continue;
        }
        d_log_rho += flow * std::log(lambda);
    }
    return -(d_log_rho - (d * log_eq).trace().real());
}

namespace {

EntropyRecord make_record(double t, const DensityMatrix& rho, const ChannelSpec& spec,
                          const EntropyRates& rates) {
    EntropyRecord r;
    r.t = t;
    r.pi = rates.pi.value;
    r.pi_stderr = rates.pi.std_error;
    r.phi = rates.phi.value;
    r.phi_stderr = rates.phi.std_error;
    r.wehrl = rates.wehrl.value;
    r.wehrl_stderr = rates.wehrl.std_error;
    try {
        r.pi_vn = pi_von_neumann(rho, spec, reference_state(spec));
    } catch (const SingularReference&) {
        r.pi_vn = std::numeric_limits<double>::quiet_NaN();
    }
    const CoherenceReport c = coherence_report(rho);
    r.c_l1 = c.l1;
    r.c_rel = c.relative;
    r.discarded_fraction = rates.pi.discarded_fraction;
    return r;
}

} // namespace

EntropyRecord entropy_record(double t, const DensityMatrix& rho, const ChannelSpec& spec,
                             const MCConfig& cfg) {
    return make_record(t, rho, spec, entropy_rates(rho, spec, cfg));
}

std::vector<EntropyRecord> entropy_curve(const Trajectory& trajectory, const ChannelSpec& spec,
                                         const MCConfig& cfg) {
    return entropy_curves(std::span(&trajectory, 1), spec, cfg)[0];
}

std::vector<std::vector<EntropyRecord>> entropy_curves(std::span<const Trajectory> trajectories,
                                                       const ChannelSpec& spec, const MCConfig& cfg) {
    std::vector<DensityMatrix> states;
    for (const Trajectory& tr : trajectories) states.insert(states.end(), tr.states.begin(), tr.states.end());
    const std::vector<EntropyRates> rates = entropy_rates_batch(states, spec, cfg);

    std::vector<std::vector<EntropyRecord>> out;
    std::size_t k = 0;
    for (const Trajectory& tr : trajectories) {
        std::vector<EntropyRecord>& rows = out.emplace_back();
        rows.reserve(tr.times.size());
        for (std::size_t i = 0; i < tr.times.size(); ++i, ++k)
            rows.push_back(make_record(tr.times[i], tr.states[i], spec, rates[k]));
    }
    return out;
}

} // namespace spinphase
