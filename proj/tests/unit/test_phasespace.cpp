#include <cmath>
#include <atomic>
#include <cstdlib>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spinphase/errors.hpp"
#include "spinphase/phasespace.hpp"
#include "spinphase/qstate.hpp"

using namespace spinphase;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

oracle::Angles random_angles(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> t(0.01, kPi - 0.01), p(0.0, 2 * kPi);
    return {t(gen), p(gen), t(gen), p(gen)};
}

PhasePoint point(const oracle::Angles& x) { return PhasePoint::from_angles(x.ta, x.pa, x.tb, x.pb); }

// Only rho14 = rho41 = alpha on top of populations 1/4.
DensityMatrix single_antidiagonal(double alpha) {
    Matrix4c m = 0.25 * Matrix4c::Identity();
    m(0, 3) = m(3, 0) = alpha;
    return DensityMatrix::from_matrix(m);
}

struct ThreadsEnv {
    explicit ThreadsEnv(const char* n) { setenv("SPINPHASE_THREADS", n, 1); }
    ~ThreadsEnv() { unsetenv("SPINPHASE_THREADS"); }
};

} // namespace

TEST_SUITE("phasespace") {

TEST_CASE("coherent vector") {
    const Eigen::Vector2cd north = coherent_vector(0.0, 1.234);
    CHECK(std::abs(north(0) - 1.0) < 1e-15);
    CHECK(std::abs(north(1)) < 1e-15);
    const Eigen::Vector2cd south = coherent_vector(kPi, 0.0);
    CHECK(std::abs(south(0)) < 1e-15);
    CHECK(std::abs(south(1) - 1.0) < 1e-15);

    // <J_z> = J cos(theta)
    Eigen::Matrix2cd sz;
    sz << 1, 0, 0, -1;
    std::mt19937_64 gen(1);
    for (int k = 0; k < 20; ++k) {
        const oracle::Angles x = random_angles(gen);
        const Eigen::Vector2cd v = coherent_vector(x.ta, x.pa);
        CHECK((v.adjoint() * sz * v)(0, 0).real() / 2 == Approx(std::cos(x.ta) / 2).epsilon(1e-14));
        CHECK(v.norm() == Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("Husimi function of simple states") {
    std::mt19937_64 gen(2);
    const DensityMatrix mixed = DensityMatrix::maximally_mixed();
    const DensityMatrix up = DensityMatrix::diagonal({1, 0, 0, 0});
    for (int k = 0; k < 50; ++k) {
        const oracle::Angles x = random_angles(gen);
        const HusimiSample s = husimi(mixed, point(x));
        CHECK(s.q == Approx(0.25).epsilon(1e-15));
        CHECK(std::abs(s.d_theta_a) + std::abs(s.d_phi_a) + std::abs(s.d_theta_b) +
                  std::abs(s.d_phi_b) < 1e-15);

        const double ca = std::cos(x.ta / 2), cb = std::cos(x.tb / 2);
        CHECK(husimi(up, point(x)).q == Approx(ca * ca * cb * cb).epsilon(1e-14));
    }
}

TEST_CASE("single-antidiagonal X-state: closed form of Q and of the Jz current") {
    const double alpha = 0.2;
    const DensityMatrix rho = single_antidiagonal(alpha);
    std::mt19937_64 gen(3);
    for (int k = 0; k < 100; ++k) {
        const oracle::Angles x = random_angles(gen);
        const double sa = std::sin(x.ta), sb = std::sin(x.tb);
        const double expected = 0.25 + alpha / 2 * sa * sb * std::cos(x.pa + x.pb);
        const HusimiSample s = husimi(rho, point(x));
        CHECK(s.q == Approx(expected).epsilon(1e-14));
        CHECK(oracle::naive_q(rho.matrix(), x) == Approx(expected).epsilon(1e-14));
        CHECK(current_jz(s, Subsystem::A) ==
              Approx(-alpha / 2 * sa * sb * std::sin(x.pa + x.pb)).epsilon(1e-13));
    }
}

TEST_CASE("Husimi value matches the naive overlap for generic states") {
    std::mt19937_64 gen(4);
    for (int k = 0; k < 200; ++k) {
        const Matrix4c rho = oracle::random_density(gen);
        const oracle::Angles x = random_angles(gen);
        CHECK(husimi(rho, point(x)).q == Approx(oracle::naive_q(rho, x)).epsilon(1e-13));
    }
}

TEST_CASE("analytic partials match central differences at 1000 points") {
    std::mt19937_64 gen(5);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Matrix4c rho = oracle::random_density(gen, 0.0);
        const oracle::Angles x = random_angles(gen);
        const HusimiSample s = husimi(rho, point(x));
        const oracle::Partials fd = oracle::fd_partials(rho, x, 1e-5);
        for (double d : {s.d_theta_a - fd.dta, s.d_phi_a - fd.dpa, s.d_theta_b - fd.dtb,
                         s.d_phi_b - fd.dpb})
            worst = std::max(worst, std::abs(d));
        CHECK(s.dphi_over_sin_a * std::sin(x.ta) == Approx(s.d_phi_a).epsilon(1e-12));
        CHECK(s.dphi_over_sin_b * std::sin(x.tb) == Approx(s.d_phi_b).epsilon(1e-12));
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("Q stays in [0, 1] and is additive in rho") {
    std::mt19937_64 gen(6);
    for (int k = 0; k < 200; ++k) {
        const Matrix4c r1 = oracle::random_density(gen, 0.0);
        const Matrix4c r2 = oracle::random_density(gen, 0.0);
        const PhasePoint p = point(random_angles(gen));
        const HusimiSample a = husimi(r1, p), b = husimi(r2, p), ab = husimi(Matrix4c(0.3 * r1 + 0.7 * r2), p);
        CHECK(a.q >= 0.0);
        CHECK(a.q <= 1.0);
        CHECK(ab.q == Approx(0.3 * a.q + 0.7 * b.q).epsilon(1e-13));
        CHECK(ab.d_theta_a == Approx(0.3 * a.d_theta_a + 0.7 * b.d_theta_a).epsilon(1e-12));
        CHECK(ab.d_phi_b == Approx(0.3 * a.d_phi_b + 0.7 * b.d_phi_b).epsilon(1e-12));
    }
}

TEST_CASE("phase-independent states have no azimuthal current") {
    std::mt19937_64 gen(7);
    const DensityMatrix rho = DensityMatrix::diagonal({0.1, 0.2, 0.3, 0.4});
    for (int k = 0; k < 50; ++k) {
        const HusimiSample s = husimi(rho, point(random_angles(gen)));
        CHECK(current_jz(s, Subsystem::A) == 0.0);
        CHECK(current_jz(s, Subsystem::B) == 0.0);
    }
}

TEST_CASE("Jz current vanishes at the pole") {
    std::mt19937_64 gen(8);
    for (int k = 0; k < 20; ++k) {
        const Matrix4c rho = oracle::random_density(gen);
        const oracle::Angles x = random_angles(gen);
        const HusimiSample s = husimi(rho, PhasePoint::from_angles(0.0, x.pa, x.tb, x.pb));
        CHECK(std::abs(current_jz(s, Subsystem::A)) < 1e-15);
        // the regular part keeps a finite limit
        CHECK(std::isfinite(s.dphi_over_sin_a));
    }
}

TEST_CASE("f current at the equator") {
    std::mt19937_64 gen(9);
    const DensityMatrix diag = DensityMatrix::diagonal({0.4, 0.1, 0.3, 0.2});
    for (int k = 0; k < 20; ++k) {
        oracle::Angles x = random_angles(gen);
        x.ta = kPi / 2;
        const PhasePoint p = point(x);
        const HusimiSample s = husimi(diag, p);
        const Complex phase = std::polar(1.0, x.pa);
        const Complex expected = 0.5 * s.q * phase - 0.5 * s.d_theta_a * phase;
        CHECK(std::abs(f_current(s, p, 0.0, 0.5, Subsystem::A) - expected) < 1e-15);

        const HusimiSample m = husimi(DensityMatrix::maximally_mixed(), p);
        CHECK(std::abs(f_current(m, p, 0.0, 0.5, Subsystem::A) - phase / 8.0) < 1e-15);
    }
}

TEST_CASE("f current is finite at the poles") {
    std::mt19937_64 gen(10);
    for (int k = 0; k < 20; ++k) {
        const Matrix4c rho = oracle::random_density(gen);
        oracle::Angles x = random_angles(gen);
        for (double pole : {0.0, kPi}) {
            x.ta = pole;
            const PhasePoint p = point(x);
            const Complex f = f_current(husimi(rho, p), p, 0.5, 0.5, Subsystem::A);
            CHECK(std::isfinite(f.real()));
            CHECK(std::isfinite(f.imag()));
        }
    }
}

TEST_CASE("raising and lowering currents are conjugate up to sign") {
    std::mt19937_64 gen(11);
    for (int k = 0; k < 20; ++k) {
        const Matrix4c rho = oracle::random_density(gen);
        const PhasePoint p = point(random_angles(gen));
        const HusimiSample s = husimi(rho, p);
        for (Subsystem j : {Subsystem::A, Subsystem::B})
            CHECK(std::abs(current_minus(s, p, j) + std::conj(current_plus(s, p, j))) < 1e-15);
    }
}

TEST_CASE("Monte-Carlo integral of a constant") {
    MCConfig cfg;
    cfg.samples = 10000;
    const MCEstimate e = mc_integrate([](const PhasePoint&) { return 1.0; }, cfg);
    CHECK(e.value == Approx(16 * kPi * kPi).epsilon(1e-14));
    CHECK(e.std_error == 0.0);
    CHECK(e.discarded_fraction == 0.0);
}

TEST_CASE("normalization of Q over the bipartite sphere") {
    MCConfig cfg;
    cfg.samples = 200000;
    const double target = 16 * kPi * kPi / 4;
    const DensityMatrix mixed = DensityMatrix::maximally_mixed();
    const MCEstimate m = mc_integrate([&](const PhasePoint& p) { return husimi(mixed, p).q; }, cfg);
    CHECK(m.value == Approx(target).epsilon(1e-12));

    for (std::uint64_t s = 0; s < 20; ++s) {
        const DensityMatrix rho = random_state(FamilyKind::AmplitudeDamping, {0.0, 0.25}, s);
        const MCEstimate e = mc_integrate([&](const PhasePoint& p) { return husimi(rho, p).q; }, cfg);
        CHECK(std::abs(e.value - target) <= 3 * e.std_error);
    }
}

TEST_CASE("sampler stays inside the open sphere") {
    for (std::uint64_t i = 0; i < 100000; ++i) {
        const PhasePoint p = sample_point(99, i);
        REQUIRE(p.a.sin_theta > 0.0);
        REQUIRE(p.b.sin_theta > 0.0);
        REQUIRE(p.a.phi >= 0.0);
        REQUIRE(p.a.phi < 2 * kPi);
    }
}

TEST_CASE("estimates are bit-identical for any worker count") {
    std::mt19937_64 gen(12);
    const Matrix4c rho = oracle::random_density(gen);
    MCConfig cfg;
    cfg.samples = 100003;  // ragged last chunk
    cfg.chunk = 1000;
    auto f = [&](const PhasePoint& p) {
        const HusimiSample s = husimi(rho, p);
        return s.d_phi_a * s.d_phi_a / s.q;
    };
    MCEstimate one, four;
    {
        ThreadsEnv env("1");
        one = mc_integrate(f, cfg);
    }
    {
        ThreadsEnv env("4");
        four = mc_integrate(f, cfg);
    }
    CHECK(one.value == four.value);
    CHECK(one.std_error == four.std_error);
    const MCEstimate again = mc_integrate(f, cfg);
    CHECK(again.value == one.value);
}

TEST_CASE("different seeds give different estimates") {
    MCConfig a, b;
    a.samples = b.samples = 5000;
    b.seed = a.seed + 1;
    const DensityMatrix rho = DensityMatrix::diagonal({1, 0, 0, 0});
    auto f = [&](const PhasePoint& p) { return husimi(rho, p).q; };
    CHECK(mc_integrate(f, a).value != mc_integrate(f, b).value);
}

TEST_CASE("discarded and non-finite samples") {
    MCConfig cfg;
    cfg.samples = 10000;
    const MCEstimate half = mc_integrate(
        [](const PhasePoint& p) -> std::optional<double> {
            if (p.a.cos_theta > 0) return std::nullopt;
            return 1.0;
        },
        cfg);
    CHECK(half.discarded_fraction == Approx(0.5).epsilon(0.05));
    CHECK(half.value == Approx(8 * kPi * kPi).epsilon(0.05));

    CHECK_THROWS_AS(mc_integrate([](const PhasePoint& p) { return p.a.cos_theta > 0 ? std::nan("") : 1.0; }, cfg),
                    NonFinite);
    // a single bad sample in 10^5 stays under the 1e-4 limit
    cfg.samples = 100000;
    std::atomic<int> count{0};
    const MCEstimate tolerant = mc_integrate(
        [&](const PhasePoint& p) { return p.a.cos_theta > 0.9998 && count++ == 0 ? HUGE_VAL : 1.0; }, cfg);
    CHECK(std::isfinite(tolerant.value));
}

TEST_CASE("exceptions thrown by integrands reach the caller") {
    ThreadsEnv env("3");
    MCConfig cfg;
    cfg.samples = 50000;
    CHECK_THROWS_AS(mc_integrate(
                        [](const PhasePoint& p) -> double {
                            if (p.a.cos_theta > 0.999) throw InvalidState("boom");
                            return 1.0;
                        },
                        cfg),
                    InvalidState);
}

TEST_CASE("configuration limits") {
    MCConfig cfg;
    cfg.samples = 999;
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    cfg.samples = 1000;
    cfg.chunk = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
}

TEST_CASE("rigid azimuth shifts leave shift-invariant integrals unchanged") {
    std::mt19937_64 gen(13);
    const Matrix4c rho = oracle::random_density(gen);
    // conjugation by exp(-i c sigma_z / 2) on qubit a
    const double c = 0.9;
    Eigen::Vector4cd phases;
    phases << std::polar(1.0, -c / 2), std::polar(1.0, -c / 2), std::polar(1.0, c / 2), std::polar(1.0, c / 2);
    const Matrix4c u = phases.asDiagonal();
    const Matrix4c rotated = u * rho * u.adjoint();

    MCConfig cfg;
    cfg.samples = 200000;
    auto wehrl_like = [](const Matrix4c& m) {
        return [&m](const PhasePoint& p) {
            const HusimiSample s = husimi(m, p);
            return -s.q * std::log(s.q) + s.d_phi_a * s.d_phi_a / s.q;
        };
    };
    const MCEstimate e0 = mc_integrate(wehrl_like(rho), cfg);
    const MCEstimate e1 = mc_integrate(wehrl_like(rotated), cfg);
    CHECK(std::abs(e0.value - e1.value) <= 3 * std::hypot(e0.std_error, e1.std_error));
    // the rotation only relabels phi: Q(rotated; phi) = Q(rho; phi - c)
    const oracle::Angles x{0.7, 1.1, 2.0, 0.3};
    CHECK(oracle::naive_q(rotated, x) == Approx(oracle::naive_q(rho, {0.7, 1.1 - c, 2.0, 0.3})).epsilon(1e-13));
}

}  // TEST_SUITE
