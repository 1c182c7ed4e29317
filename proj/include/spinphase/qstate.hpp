#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace spinphase {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix4cd;
using Populations = std::array<double, 4>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = -1e-10;

/// Two-qubit density matrix in the computational basis |00>, |01>, |10>, |11>,
/// where |0> is the sigma_z = +1 (excited) level of each qubit.
///
/// Instances are always Hermitian, unit-trace and positive semi-definite
/// within the tolerances above; every constructor validates.
class DensityMatrix {
public:
    /// Validates and wraps `m`. Throws InvalidState (Hermiticity, trace) or
    /// NotPositive (smallest eigenvalue below kPsdTol).
    static DensityMatrix from_matrix(const Matrix4c& m);
    static DensityMatrix maximally_mixed();
    static DensityMatrix diagonal(const Populations& populations);
    static DensityMatrix pure(const Eigen::Vector4cd& psi);

    const Matrix4c& matrix() const noexcept { return m_; }
    Complex operator()(int i, int j) const { return m_(i, j); }

    Populations populations() const;
    Eigen::Vector4d eigenvalues() const;
    double min_eigenvalue() const;
    DensityMatrix diagonal_part() const;

private:
    explicit DensityMatrix(const Matrix4c& m) : m_(m) {}
    Matrix4c m_;
};

double min_eigenvalue(const Matrix4c& m);
bool is_hermitian(const Matrix4c& m, double tol = kHermitianTol);

// Coherence families. Slot layout (1-based, upper triangle, mirrored):
//   dephasing: alpha -> (1,4),(2,3); beta -> (1,2),(1,3),(2,4),(3,4)
//   amplitude damping: alpha -> (1,2),(1,3); beta -> (2,4),(3,4);
//                      gamma -> (1,4),(2,3)
struct DephasingFamily {
    Populations populations{0.25, 0.25, 0.25, 0.25};
    double alpha = 0.0;
    double beta = 0.0;

    DephasingFamily rescaled(double mu) const { return rescaled(mu, mu); }
    DephasingFamily rescaled(double mu_alpha, double mu_beta) const;
};

struct AmplitudeDampingFamily {
    Populations populations{0.25, 0.25, 0.25, 0.25};
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    AmplitudeDampingFamily rescaled(double mu) const { return rescaled(mu, mu, mu); }
    AmplitudeDampingFamily rescaled(double mu_alpha, double mu_beta, double mu_gamma) const;
};

// Raw layouts, no validation.
Matrix4c layout(const DephasingFamily& family);
Matrix4c layout(const AmplitudeDampingFamily& family);

DensityMatrix build_dephasing_state(const DephasingFamily& family);
DensityMatrix build_ad_state(const AmplitudeDampingFamily& family);

enum class FamilyKind { Dephasing, AmplitudeDamping };

// Which coherence classes receive a random draw; inactive ones are zero.
// gamma is ignored for dephasing families.
struct ActiveClasses {
    bool alpha = true;
    bool beta = true;
    bool gamma = true;
};

struct CoherenceBounds {
    double lo = 0.0;
    double hi = 0.25;
};

inline constexpr int kMaxRejections = 10000;

// Populations xi_i ~ U[0,1] normalized to sum one, each active coherence
// ~ U[lo, hi]; the whole draw is repeated until the state is PSD.
// Throws Exhausted after kMaxRejections rejected draws.
DephasingFamily random_dephasing_family(ActiveClasses classes, CoherenceBounds bounds,
                                        std::uint64_t seed);
AmplitudeDampingFamily random_ad_family(ActiveClasses classes, CoherenceBounds bounds,
                                        std::uint64_t seed);
DensityMatrix random_state(FamilyKind kind, CoherenceBounds bounds, std::uint64_t seed);

struct CoherenceReport {
    double l1 = 0.0;
    double relative = 0.0;
};

double l1_coherence(const DensityMatrix& rho);
double relative_coherence(const DensityMatrix& rho);
CoherenceReport coherence_report(const DensityMatrix& rho);

/// Entropies in nats.
double von_neumann_entropy(const DensityMatrix& rho);

/// Tr(rho ln rho - rho ln sigma). Throws SingularReference when sigma has an
/// eigenvalue below 1e-14.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

/// exp(-beta H)/Z with H = (eps_a/2) sz x 1 + (eps_b/2) 1 x sz.
/// beta may be +infinity (ground state |11><11|).
DensityMatrix gibbs_state(double eps_a, double eps_b, double beta);

/// Inverse temperature for which a qubit of splitting eps has mean bath
/// occupation nbar: beta * eps = ln((nbar + 1) / nbar). nbar = 0 gives +inf.
double beta_from_occupation(double nbar, double eps);

// Plain-text matrix format: four lines, four whitespace-separated entries
// per line, each written as "re+imi" / "re-imi".
std::string to_text(const DensityMatrix& rho);
DensityMatrix parse_state(std::string_view text);
DensityMatrix read_state_file(const std::filesystem::path& path);
void write_state_file(const std::filesystem::path& path, const DensityMatrix& rho);

} // namespace spinphase
