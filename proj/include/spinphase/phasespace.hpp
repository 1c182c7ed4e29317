#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <type_traits>
#include <vector>

#include "spinphase/qstate.hpp"

namespace spinphase {

enum class Subsystem { A, B };

/// Point on one Bloch sphere with the trigonometric values the Husimi
/// evaluation needs.
struct SphereCoord {
    double theta = 0.0;
    double phi = 0.0;
    double cos_theta = 1.0;
    double sin_theta = 0.0;
    double cos_half = 1.0;
    double sin_half = 0.0;
    double cos_phi = 1.0;
    double sin_phi = 0.0;

    static SphereCoord from_angles(double theta, double phi);
    /// Built from cos(theta) directly; used by the sampler.
    static SphereCoord from_cos(double cos_theta, double phi);

    Complex phase() const noexcept { return {cos_phi, sin_phi}; }
};

/// A point (theta_a, phi_a, theta_b, phi_b) of the bipartite phase space.
struct PhasePoint {
    SphereCoord a;
    SphereCoord b;

    static PhasePoint from_angles(double theta_a, double phi_a, double theta_b, double phi_b) {
        return {SphereCoord::from_angles(theta_a, phi_a), SphereCoord::from_angles(theta_b, phi_b)};
    }
    const SphereCoord& operator[](Subsystem s) const noexcept { return s == Subsystem::A ? a : b; }
};

/// Q(Omega) and its first angular partials.
///
/// `dphi_over_sin_*` is d_phi Q / sin(theta) of the same subsystem. It has a
/// finite limit at both poles, so cot(theta) d_phi Q and (d_phi Q / sin theta)^2
/// are evaluated without dividing by sin(theta).
struct HusimiSample {
    double q = 0.0;
    double d_theta_a = 0.0;
    double d_phi_a = 0.0;
    double d_theta_b = 0.0;
    double d_phi_b = 0.0;
    double dphi_over_sin_a = 0.0;
    double dphi_over_sin_b = 0.0;

    double d_theta(Subsystem s) const noexcept { return s == Subsystem::A ? d_theta_a : d_theta_b; }
    double d_phi(Subsystem s) const noexcept { return s == Subsystem::A ? d_phi_a : d_phi_b; }
    double dphi_over_sin(Subsystem s) const noexcept {
        return s == Subsystem::A ? dphi_over_sin_a : dphi_over_sin_b;
    }
};

/// Spin-1/2 coherent state e^{-i phi Jz} e^{-i theta Jy} |1/2, 1/2> up to a
/// global phase: (cos(theta/2), e^{i phi} sin(theta/2)).
Eigen::Vector2cd coherent_vector(double theta, double phi);

HusimiSample husimi(const Matrix4c& rho, const PhasePoint& p);
inline HusimiSample husimi(const DensityMatrix& rho, const PhasePoint& p) {
    return husimi(rho.matrix(), p);
}

// Phase-space images of the commutators with Jz, J+ and J- for subsystem j:
//   [Jz, .] -> -i d_phi Q
//   [J+, .] ->  e^{i phi} (d_theta + i cot(theta) d_phi) Q
//   [J-, .] -> -e^{-i phi} (d_theta - i cot(theta) d_phi) Q
/// Returns d_phi Q; the Jz current is -i times this and |Jz(Q)|^2 = d_phi Q^2.
double current_jz(const HusimiSample& s, Subsystem j);
Complex current_plus(const HusimiSample& s, const PhasePoint& p, Subsystem j);
Complex current_minus(const HusimiSample& s, const PhasePoint& p, Subsystem j);

/// Amplitude-damping current
///   f_j(Q) = 1/2 [2JQ - Jz(Q)] e^{i phi_j} sin(theta_j)
///          + 1/2 [cos(theta_j) - (2 nbar + 1)] J+(Q).
Complex f_current(const HusimiSample& s, const PhasePoint& p, double nbar, double spin,
                  Subsystem j);

/// ((2J+1) / (4 pi))^2: normalization of the bipartite phase-space measure.
inline double phase_space_norm(double spin) {
    const double x = (2.0 * spin + 1.0) / (4.0 * std::numbers::pi);
    return x * x;
}

// -- Monte-Carlo integration over d Omega = sin(theta_a) sin(theta_b) d theta d phi ...

struct MCConfig {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 7;
    std::uint64_t chunk = 4096;  // samples per deterministic stratum

    void validate() const;
};

struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double discarded_fraction = 0.0;  // samples dropped by the integrand (Q floor)
};

/// Total measure of the bipartite sphere, (4 pi)^2.
inline constexpr double kPhaseSpaceVolume = 16.0 * std::numbers::pi * std::numbers::pi;

inline constexpr double kNonFiniteLimit = 1e-4;

/// The sample drawn for `index` of the stream keyed by `seed`: cos(theta_j)
/// uniform on (-1, 1), phi_j uniform on [0, 2 pi). Pure function of
/// (seed, index); never lands exactly on a pole.
PhasePoint sample_point(std::uint64_t seed, std::uint64_t index);

/// Worker count from SPINPHASE_THREADS (defaults to the hardware thread
/// count). Affects speed only, never results.
unsigned worker_count();

namespace detail {

// Welford accumulator for one output of one chunk.
struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) noexcept {
        if (o.n == 0.0) return;
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }
};

/// Runs body(chunk_index) for every chunk, possibly on several threads.
void run_chunks(std::uint64_t chunks, const std::function<void(std::uint64_t)>& body);

void throw_non_finite(std::uint64_t count, std::uint64_t samples);

} // namespace detail

/// Estimates N integrals (4 pi)^2 <f_k> for each of `count` integrands that
/// share one sample stream; every point is drawn once and handed to all of
/// them.
///
/// `f(j, point)` returns std::optional<std::array<double, N>> for integrand j;
/// std::nullopt marks a sample discarded by the integrand's own guard
/// (counted, contributes 0). Samples with a non-finite output also contribute
/// 0; if they exceed kNonFiniteLimit of the total, NonFinite is thrown. Chunks
/// are reduced in index order, so the result is bit-identical for any worker
/// count and does not depend on `count`.
template <std::size_t N, class F>
std::vector<std::array<MCEstimate, N>> mc_integrate_batch(std::size_t count, F&& f,
                                                          const MCConfig& cfg) {
    cfg.validate();
    const std::uint64_t chunks = (cfg.samples + cfg.chunk - 1) / cfg.chunk;
    struct ChunkResult {
        std::array<detail::Moments, N> moments{};
        std::uint64_t discarded = 0;
        std::uint64_t non_finite = 0;
    };
    std::vector<ChunkResult> results(chunks * count);  // [chunk][integrand]
    detail::run_chunks(chunks, [&](std::uint64_t c) {
        ChunkResult* r = results.data() + c * count;
        const std::uint64_t begin = c * cfg.chunk;
        const std::uint64_t end = std::min(cfg.samples, begin + cfg.chunk);
        for (std::uint64_t i = begin; i < end; ++i) {
            const PhasePoint p = sample_point(cfg.seed, i);
            for (std::size_t j = 0; j < count; ++j) {
                const std::optional<std::array<double, N>> v = f(j, p);
                bool finite = v.has_value();
                if (finite)
                    for (double x : *v) finite = finite && std::isfinite(x);
                if (!v) ++r[j].discarded;
                else if (!finite) ++r[j].non_finite;
                for (std::size_t k = 0; k < N; ++k) r[j].moments[k].add(finite ? (*v)[k] : 0.0);
            }
        }
    });

    std::vector<std::array<MCEstimate, N>> out(count);
    for (std::size_t j = 0; j < count; ++j) {
        std::array<detail::Moments, N> total{};
        std::uint64_t discarded = 0;
        std::uint64_t non_finite = 0;
        for (std::uint64_t c = 0; c < chunks; ++c) {
            const ChunkResult& r = results[c * count + j];
            for (std::size_t k = 0; k < N; ++k) total[k].merge(r.moments[k]);
            discarded += r.discarded;
            non_finite += r.non_finite;
        }
        if (non_finite > kNonFiniteLimit * static_cast<double>(cfg.samples))
            detail::throw_non_finite(non_finite, cfg.samples);
        for (std::size_t k = 0; k < N; ++k) {
            const detail::Moments& m = total[k];
            const double var = m.n > 1.0 ? m.m2 / (m.n - 1.0) : 0.0;
            out[j][k].value = kPhaseSpaceVolume * m.mean;
            out[j][k].std_error = kPhaseSpaceVolume * std::sqrt(var / m.n);
            out[j][k].discarded_fraction =
                static_cast<double>(discarded + non_finite) / static_cast<double>(cfg.samples);
        }
    }
    return out;
}

/// Single vector-valued integrand `f(point)`, see mc_integrate_batch.
template <std::size_t N, class F>
std::array<MCEstimate, N> mc_integrate_n(F&& f, const MCConfig& cfg) {
    return mc_integrate_batch<N>(
        1, [&f](std::size_t, const PhasePoint& p) { return f(p); }, cfg)[0];
}

/// Scalar integrand; f may return double or std::optional<double>.
template <class F>
MCEstimate mc_integrate(F&& f, const MCConfig& cfg) {
    auto wrapped = [&f](const PhasePoint& p) -> std::optional<std::array<double, 1>> {
        if constexpr (std::is_same_v<std::decay_t<decltype(f(p))>, std::optional<double>>) {
            const std::optional<double> v = f(p);
            if (!v) return std::nullopt;
            return std::array<double, 1>{*v};
        } else {
            return std::array<double, 1>{static_cast<double>(f(p))};
        }
    };
    return mc_integrate_n<1>(wrapped, cfg)[0];
}

} // namespace spinphase
