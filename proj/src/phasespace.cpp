#include "spinphase/phasespace.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "spinphase/errors.hpp"

namespace spinphase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// SplitMix64 evaluated at an arbitrary position of its stream.
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform on the open interval (0, 1).
double open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// v^+ B v for the 2x2 block with entries at(k, l).
template <class At>
Complex quad_form(const Complex v0, const Complex v1, At&& at) {
    const Complex b0 = at(0, 0) * v0 + at(0, 1) * v1;
    const Complex b1 = at(1, 0) * v0 + at(1, 1) * v1;
    return std::conj(v0) * b0 + std::conj(v1) * b1;
}

struct Reduced {
    double r00;
    double r11;
    Complex r01;
};

struct Partials {
    double d_theta;
    double d_phi;
    double dphi_over_sin;
};

// Q = 1/2 (1 + cos t) R00 + 1/2 (1 - cos t) R11 + sin t Re[e^{i phi} R01]
Partials partials(const Reduced& r, const SphereCoord& c) {
    const Complex z = c.phase() * r.r01;
    const double h = -z.imag();
    return {0.5 * c.sin_theta * (r.r11 - r.r00) + c.cos_theta * z.real(), c.sin_theta * h, h};
}

} // namespace

SphereCoord SphereCoord::from_angles(double theta, double phi) {
    SphereCoord c;
    c.theta = theta;
    c.phi = phi;
    c.cos_theta = std::cos(theta);
    c.sin_theta = std::sin(theta);
    c.cos_half = std::cos(0.5 * theta);
    c.sin_half = std::sin(0.5 * theta);
    c.cos_phi = std::cos(phi);
    c.sin_phi = std::sin(phi);
    return c;
}

SphereCoord SphereCoord::from_cos(double cos_theta, double phi) {
    SphereCoord c;
    c.theta = std::acos(cos_theta);
    c.phi = phi;
    c.cos_theta = cos_theta;
    c.sin_theta = std::sqrt((1.0 - cos_theta) * (1.0 + cos_theta));
    c.cos_half = std::sqrt(0.5 * (1.0 + cos_theta));
    c.sin_half = std::sqrt(0.5 * (1.0 - cos_theta));
    c.cos_phi = std::cos(phi);
    c.sin_phi = std::sin(phi);
    return c;
}

Eigen::Vector2cd coherent_vector(double theta, double phi) {
    return {Complex(std::cos(0.5 * theta), 0.0), std::polar(std::sin(0.5 * theta), phi)};
}

HusimiSample husimi(const Matrix4c& rho, const PhasePoint& p) {
    const Complex a0(p.a.cos_half, 0.0);
    const Complex a1 = p.a.sin_half * p.a.phase();
    const Complex b0(p.b.cos_half, 0.0);
    const Complex b1 = p.b.sin_half * p.b.phase();

    // Reduce over b: blocks rho(2m + k, 2n + l), quadratic form in v_b.
    auto over_b = [&](int m, int n) {
        return quad_form(b0, b1, [&](int k, int l) { return rho(2 * m + k, 2 * n + l); });
    };
    // Reduce over a: rho(2k + m, 2l + n), quadratic form in v_a.
    auto over_a = [&](int m, int n) {
        return quad_form(a0, a1, [&](int k, int l) { return rho(2 * k + m, 2 * l + n); });
    };
    const Reduced ra{over_b(0, 0).real(), over_b(1, 1).real(), over_b(0, 1)};
    const Reduced rb{over_a(0, 0).real(), over_a(1, 1).real(), over_a(0, 1)};

    HusimiSample s;
    s.q = p.a.cos_half * p.a.cos_half * ra.r00 + p.a.sin_half * p.a.sin_half * ra.r11 +
          p.a.sin_theta * (p.a.phase() * ra.r01).real();
    const Partials pa = partials(ra, p.a);
    const Partials pb = partials(rb, p.b);
    s.d_theta_a = pa.d_theta;
    s.d_phi_a = pa.d_phi;
    s.dphi_over_sin_a = pa.dphi_over_sin;
    s.d_theta_b = pb.d_theta;
    s.d_phi_b = pb.d_phi;
    s.dphi_over_sin_b = pb.dphi_over_sin;
    return s;
}

double current_jz(const HusimiSample& s, Subsystem j) { return s.d_phi(j); }

Complex current_plus(const HusimiSample& s, const PhasePoint& p, Subsystem j) {
    const SphereCoord& c = p[j];
    // cot(theta) d_phi Q = cos(theta) (d_phi Q / sin theta)
    return c.phase() * Complex(s.d_theta(j), c.cos_theta * s.dphi_over_sin(j));
}

Complex current_minus(const HusimiSample& s, const PhasePoint& p, Subsystem j) {
    const SphereCoord& c = p[j];
    return -std::conj(c.phase()) * Complex(s.d_theta(j), -c.cos_theta * s.dphi_over_sin(j));
}

Complex f_current(const HusimiSample& s, const PhasePoint& p, double nbar, double spin,
                  Subsystem j) {
    const SphereCoord& c = p[j];
    const Complex jz(0.0, -s.d_phi(j));
    return 0.5 * (2.0 * spin * s.q - jz) * c.phase() * c.sin_theta +
           0.5 * (c.cos_theta - (2.0 * nbar + 1.0)) * current_plus(s, p, j);
}

void MCConfig::validate() const {
    if (samples < 1000) throw InvalidConfig("samples", "need at least 1000 samples");
    if (chunk == 0) throw InvalidConfig("chunk", "must be > 0");
}

PhasePoint sample_point(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t base = splitmix64(seed) + 4 * index * 0x9e3779b97f4a7c15ULL;
    const double ua = open_unit(splitmix64(base));
    const double va = open_unit(splitmix64(base + 0x9e3779b97f4a7c15ULL));
    const double ub = open_unit(splitmix64(base + 2 * 0x9e3779b97f4a7c15ULL));
    const double vb = open_unit(splitmix64(base + 3 * 0x9e3779b97f4a7c15ULL));
    return {SphereCoord::from_cos(2.0 * ua - 1.0, kTwoPi * va),
            SphereCoord::from_cos(2.0 * ub - 1.0, kTwoPi * vb)};
}

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPINPHASE_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1) return static_cast<unsigned>(n);
    }
    return hw;
}

namespace detail {

void run_chunks(std::uint64_t chunks, const std::function<void(std::uint64_t)>& body) {
    const std::uint64_t workers = std::min<std::uint64_t>(worker_count(), chunks);
    if (workers <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::uint64_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                try {
                    for (std::uint64_t c = next++; c < chunks; c = next++) body(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = chunks;
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
}

void throw_non_finite(std::uint64_t count, std::uint64_t samples) {
    throw NonFinite(std::to_string(count) + " of " + std::to_string(samples) +
                    " Monte-Carlo samples were non-finite");
}

} // namespace detail

} // namespace spinphase
