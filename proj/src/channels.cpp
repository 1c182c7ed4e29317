#include "spinphase/channels.hpp"

#include <algorithm>
#include <cmath>

#include "spinphase/errors.hpp"

namespace spinphase {

namespace {

using Matrix2c = Eigen::Matrix2cd;

const Matrix2c& sigma_z() {
    static const Matrix2c m = (Matrix2c() << 1, 0, 0, -1).finished();
    return m;
}

// sigma_minus |0> = |1>, |0> being the excited level.
const Matrix2c& sigma_minus() {
    static const Matrix2c m = (Matrix2c() << 0, 0, 1, 0).finished();
    return m;
}

Matrix4c on_a(const Matrix2c& op) {
    Matrix4c m = Matrix4c::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = op(i, j) * Matrix2c::Identity();
    return m;
}

Matrix4c on_b(const Matrix2c& op) {
    Matrix4c m = Matrix4c::Zero();
    m.block<2, 2>(0, 0) = op;
    m.block<2, 2>(2, 2) = op;
    return m;
}

Matrix4c double_commutator(const Matrix4c& z, const Matrix4c& rho) {
    const Matrix4c c = z * rho - rho * z;
    return z * c - c * z;
}

// L rho L^+ - 1/2 {L^+ L, rho}
Matrix4c lindblad_term(const Matrix4c& l, const Matrix4c& rho) {
    const Matrix4c ld = l.adjoint();
    const Matrix4c n = ld * l;
    return l * rho * ld - 0.5 * (n * rho + rho * n);
}

Matrix4c local_dissipator(const Matrix4c& rho, const LocalBath& bath, ChannelKind kind,
                          const Matrix4c& z, const Matrix4c& lower) {
    if (kind == ChannelKind::Dephasing) return -(bath.rate / 8.0) * double_commutator(z, rho);
    const Matrix4c raise = lower.adjoint();
    return bath.rate * (bath.nbar + 1.0) * lindblad_term(lower, rho) +
           bath.rate * bath.nbar * lindblad_term(raise, rho);
}

void check_time(double t) {
    if (!(t >= 0.0)) throw InvalidConfig("t", "propagation time must be >= 0");
}

} // namespace

ChannelSpec ChannelSpec::dephasing(double lambda) {
    ChannelSpec s;
    s.kind = ChannelKind::Dephasing;
    s.a = s.b = LocalBath{lambda, 0.0};
    return s;
}

ChannelSpec ChannelSpec::amplitude_damping(double gamma, double nbar, double eps) {
    ChannelSpec s;
    s.kind = ChannelKind::AmplitudeDamping;
    s.a = s.b = LocalBath{gamma, nbar};
    s.eps_a = s.eps_b = eps;
    return s;
}

bool ChannelSpec::symmetric() const noexcept {
    return a.rate == b.rate && a.nbar == b.nbar;
}

double ChannelSpec::gamma_bar() const noexcept { return a.rate * (2.0 * a.nbar + 1.0); }

double ChannelSpec::max_rate() const noexcept {
    if (kind == ChannelKind::Dephasing) return std::max(a.rate, b.rate);
    return std::max(a.rate * (a.nbar + 1.0), b.rate * (b.nbar + 1.0));
}

void ChannelSpec::validate() const {
    for (const LocalBath* bath : {&a, &b}) {
        if (!(bath->rate >= 0.0) || !std::isfinite(bath->rate))
            throw InvalidConfig("rate", "must be finite and >= 0");
        if (!(bath->nbar >= 0.0) || !std::isfinite(bath->nbar))
            throw InvalidConfig("nbar", "must be finite and >= 0");
    }
    if (!(eps_a > 0.0 && eps_b > 0.0)) throw InvalidConfig("eps", "must be > 0");
}

DensityMatrix reference_state(const ChannelSpec& spec) {
    if (spec.kind == ChannelKind::Dephasing) return DensityMatrix::maximally_mixed();
    return gibbs_state(spec.eps_a, spec.eps_b, beta_from_occupation(spec.a.nbar, spec.eps_a));
}

Matrix4c dissipator_apply(const Matrix4c& rho, const ChannelSpec& spec) {
    static const Matrix4c za = on_a(sigma_z());
    static const Matrix4c zb = on_b(sigma_z());
    static const Matrix4c la = on_a(sigma_minus());
    static const Matrix4c lb = on_b(sigma_minus());
    return local_dissipator(rho, spec.a, spec.kind, za, la) +
           local_dissipator(rho, spec.b, spec.kind, zb, lb);
}

DensityMatrix dephasing_propagate(const DensityMatrix& rho0, double lambda, double t) {
    check_time(t);
    const double anti = std::exp(-lambda * t);
    const double rest = std::exp(-0.5 * lambda * t);
    Matrix4c m = rho0.matrix();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) m(i, j) *= (i + j == 3) ? anti : rest;
    return DensityMatrix::from_matrix(m);
}

DensityMatrix ad_propagate(const DensityMatrix& rho0, double gamma, double nbar, double t) {
    check_time(t);
    const double gbar = gamma * (2.0 * nbar + 1.0);
    const double pe = nbar / (2.0 * nbar + 1.0);  // excited-state weight at equilibrium
    const double pg = 1.0 - pe;
    const double relax = std::exp(-gbar * t);
    const double half = std::exp(-0.5 * gbar * t);
    const Matrix4c& r = rho0.matrix();
    Matrix4c m = Matrix4c::Zero();

    // Populations: Kronecker product of the single-qubit transition matrices
    // P(t) = P_eq + e^{-gbar t} (1 - P_eq), columns of P_eq = (pe, pg).
    Eigen::Matrix2d eq;
    eq << pe, pe, pg, pg;
    const Eigen::Matrix2d p = eq + relax * (Eigen::Matrix2d::Identity() - eq);
    Eigen::Matrix4d pp;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) pp.block<2, 2>(2 * i, 2 * j) = p(i, j) * p;
    const Eigen::Vector4d pops = pp * r.diagonal().real();
    for (int i = 0; i < 4; ++i) m(i, i) = pops[i];

    // Coupled pairs (rho12, rho34) and (rho13, rho24): the "excited" member
    // relaxes towards pe * (sum), the other towards pg * (sum), on top of an
    // overall e^{-gbar t / 2} decay of the sum.
    auto coupled = [&](int xi, int xj, int yi, int yj) {
        const Complex x0 = r(xi, xj);
        const Complex y0 = r(yi, yj);
        const Complex s0 = x0 + y0;
        m(xi, xj) = half * (pe * s0 + (x0 - pe * s0) * relax);
        m(yi, yj) = half * (pg * s0 + (y0 - pg * s0) * relax);
    };
    coupled(0, 1, 2, 3);
    coupled(0, 2, 1, 3);
    m(0, 3) = r(0, 3) * relax;
    m(1, 2) = r(1, 2) * relax;

    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) m(i, j) = std::conj(m(j, i));
    return DensityMatrix::from_matrix(m);
}

DensityMatrix propagate(const DensityMatrix& rho0, const ChannelSpec& spec, double t) {
    if (!spec.symmetric())
        throw InvalidConfig("channel", "closed-form propagators need equal baths on both qubits");
    if (spec.kind == ChannelKind::Dephasing) return dephasing_propagate(rho0, spec.a.rate, t);
    return ad_propagate(rho0, spec.a.rate, spec.a.nbar, t);
}

namespace {

Matrix4c rk4_steps(Matrix4c rho, const ChannelSpec& spec, double h, long steps) {
    for (long k = 0; k < steps; ++k) {
        const Matrix4c k1 = dissipator_apply(rho, spec);
        const Matrix4c k2 = dissipator_apply(Matrix4c(rho + 0.5 * h * k1), spec);
        const Matrix4c k3 = dissipator_apply(Matrix4c(rho + 0.5 * h * k2), spec);
        const Matrix4c k4 = dissipator_apply(Matrix4c(rho + h * k3), spec);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + rho.adjoint()).eval();
    }
    return rho;
}

void check_step(const ChannelSpec& spec, double dt) {
    if (!(dt > 0.0)) throw InvalidConfig("dt", "must be > 0");
    const double rate = spec.max_rate();
    if (rate > 0.0 && dt > 1e-3 / rate * (1.0 + 1e-12))
        throw InvalidConfig("dt", "must be <= 1e-3 / max rate");
}

DensityMatrix finish_rk4(const Matrix4c& rho, double trace0) {
    const double drift = std::abs(rho.trace().real() - trace0);
    if (drift > 1e-8) throw StepTooLarge("rk4: trace drift exceeds 1e-8");
    return DensityMatrix::from_matrix(rho);
}

} // namespace

DensityMatrix rk4_evolve(const DensityMatrix& rho0, const ChannelSpec& spec, double t, double dt) {
    check_time(t);
    check_step(spec, dt);
    const long steps = static_cast<long>(std::ceil(t / dt));
    if (steps == 0) return rho0;
    return finish_rk4(rk4_steps(rho0.matrix(), spec, t / steps, steps), 1.0);
}

std::vector<double> time_grid(double tmax, int points) {
    if (!(tmax > 0.0) || !std::isfinite(tmax)) throw InvalidConfig("tmax", "must be > 0");
    if (points < 2) throw InvalidConfig("steps", "need at least 2 grid points");
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[i] = tmax * i / (points - 1);
    return grid;
}

Trajectory evolve(const DensityMatrix& rho0, const ChannelSpec& spec,
                  std::span<const double> grid) {
    Trajectory traj;
    traj.times.assign(grid.begin(), grid.end());
    traj.states.reserve(grid.size());
    for (double t : grid) traj.states.push_back(propagate(rho0, spec, t));
    return traj;
}

Trajectory rk4_trajectory(const DensityMatrix& rho0, const ChannelSpec& spec,
                          std::span<const double> grid, double dt) {
    check_step(spec, dt);
    Trajectory traj;
    traj.times.assign(grid.begin(), grid.end());
    Matrix4c rho = rho0.matrix();
    double t = 0.0;
    for (double target : grid) {
        if (target < t) throw InvalidConfig("grid", "times must be non-decreasing from 0");
        const long steps = static_cast<long>(std::ceil((target - t) / dt));
        if (steps > 0) rho = rk4_steps(rho, spec, (target - t) / steps, steps);
        traj.states.push_back(finish_rk4(rho, 1.0));
        t = target;
    }
    return traj;
}

} // namespace spinphase
