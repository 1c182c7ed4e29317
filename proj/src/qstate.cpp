#include "spinphase/qstate.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "spinphase/errors.hpp"

namespace spinphase {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix4c> eigensolve(const Matrix4c& m, bool vectors) {
    return Eigen::SelfAdjointEigenSolver<Matrix4c>(
        m, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
}

// 0 ln 0 := 0
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

void set_symmetric(Matrix4c& m, int i, int j, double value) {
    m(i, j) = value;
    m(j, i) = value;
}

Populations draw_populations(std::mt19937_64& gen) {
    Populations p{};
    double total = 0.0;
    for (double& x : p) {
        x = uniform01(gen);
        total += x;
    }
    for (double& x : p) x /= total;
    return p;
}

void check_bounds(CoherenceBounds bounds) {
    if (!(bounds.lo >= 0.0 && bounds.hi <= 0.5 && bounds.lo <= bounds.hi))
        throw InvalidConfig("bounds", "coherence bounds must satisfy 0 <= lo <= hi <= 0.5");
}

template <class Family, class Draw>
Family rejection_sample(Draw&& draw, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        Family family = draw(gen);
        if (min_eigenvalue(layout(family)) >= kPsdTol) return family;
    }
    throw Exhausted("random state: " + std::to_string(kMaxRejections) +
                    " draws rejected; coherence bounds too large");
}

std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, end);
}

} // namespace

// -- DensityMatrix ------------------------------------------------------------

double min_eigenvalue(const Matrix4c& m) {
    return eigensolve(m, false).eigenvalues().minCoeff();
}

bool is_hermitian(const Matrix4c& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

DensityMatrix DensityMatrix::from_matrix(const Matrix4c& m) {
    if (!m.allFinite()) throw InvalidState("density matrix has non-finite entries");
    if (!is_hermitian(m)) throw InvalidState("density matrix is not Hermitian");
    const Complex tr = m.trace();
    if (std::abs(tr.real() - 1.0) > kTraceTol || std::abs(tr.imag()) > kTraceTol)
        throw InvalidState("density matrix trace " + format_double(tr.real()) + " != 1");
    // Symmetrize so the stored matrix is exactly Hermitian.
    const Matrix4c h = 0.5 * (m + m.adjoint());
    const double lo = spinphase::min_eigenvalue(h);
    if (lo < kPsdTol)
        throw NotPositive("density matrix not positive semi-definite (min eigenvalue " +
                              format_double(lo) + ")",
                          lo);
    return DensityMatrix(h);
}

DensityMatrix DensityMatrix::maximally_mixed() {
    return DensityMatrix(Matrix4c::Identity() * 0.25);
}

DensityMatrix DensityMatrix::diagonal(const Populations& populations) {
    Matrix4c m = Matrix4c::Zero();
    for (int i = 0; i < 4; ++i) m(i, i) = populations[i];
    return from_matrix(m);
}

DensityMatrix DensityMatrix::pure(const Eigen::Vector4cd& psi) {
    const Eigen::Vector4cd v = psi.normalized();
    return from_matrix(v * v.adjoint());
}

Populations DensityMatrix::populations() const {
    return {m_(0, 0).real(), m_(1, 1).real(), m_(2, 2).real(), m_(3, 3).real()};
}

Eigen::Vector4d DensityMatrix::eigenvalues() const {
    return eigensolve(m_, false).eigenvalues();
}

double DensityMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

DensityMatrix DensityMatrix::diagonal_part() const {
    return DensityMatrix(Matrix4c(m_.diagonal().asDiagonal()));
}

// -- families -----------------------------------------------------------------

DephasingFamily DephasingFamily::rescaled(double mu_alpha, double mu_beta) const {
    return {populations, alpha * mu_alpha, beta * mu_beta};
}

AmplitudeDampingFamily AmplitudeDampingFamily::rescaled(double mu_alpha, double mu_beta,
                                                        double mu_gamma) const {
    return {populations, alpha * mu_alpha, beta * mu_beta, gamma * mu_gamma};
}

Matrix4c layout(const DephasingFamily& f) {
    Matrix4c m = Matrix4c::Zero();
    for (int i = 0; i < 4; ++i) m(i, i) = f.populations[i];
    set_symmetric(m, 0, 3, f.alpha);
    set_symmetric(m, 1, 2, f.alpha);
    set_symmetric(m, 0, 1, f.beta);
    set_symmetric(m, 0, 2, f.beta);
    set_symmetric(m, 1, 3, f.beta);
    set_symmetric(m, 2, 3, f.beta);
    return m;
}

Matrix4c layout(const AmplitudeDampingFamily& f) {
    Matrix4c m = Matrix4c::Zero();
    for (int i = 0; i < 4; ++i) m(i, i) = f.populations[i];
    set_symmetric(m, 0, 1, f.alpha);
    set_symmetric(m, 0, 2, f.alpha);
    set_symmetric(m, 1, 3, f.beta);
    set_symmetric(m, 2, 3, f.beta);
    set_symmetric(m, 0, 3, f.gamma);
    set_symmetric(m, 1, 2, f.gamma);
    return m;
}

DensityMatrix build_dephasing_state(const DephasingFamily& family) {
    return DensityMatrix::from_matrix(layout(family));
}

DensityMatrix build_ad_state(const AmplitudeDampingFamily& family) {
    return DensityMatrix::from_matrix(layout(family));
}

DephasingFamily random_dephasing_family(ActiveClasses classes, CoherenceBounds bounds,
                                        std::uint64_t seed) {
    check_bounds(bounds);
    auto draw = [&](std::mt19937_64& gen) {
        DephasingFamily f;
        f.populations = draw_populations(gen);
        const double width = bounds.hi - bounds.lo;
        if (classes.alpha) f.alpha = bounds.lo + width * uniform01(gen);
        if (classes.beta) f.beta = bounds.lo + width * uniform01(gen);
        return f;
    };
    return rejection_sample<DephasingFamily>(draw, seed);
}

AmplitudeDampingFamily random_ad_family(ActiveClasses classes, CoherenceBounds bounds,
                                        std::uint64_t seed) {
    check_bounds(bounds);
    auto draw = [&](std::mt19937_64& gen) {
        AmplitudeDampingFamily f;
        f.populations = draw_populations(gen);
        const double width = bounds.hi - bounds.lo;
        if (classes.alpha) f.alpha = bounds.lo + width * uniform01(gen);
        if (classes.beta) f.beta = bounds.lo + width * uniform01(gen);
        if (classes.gamma) f.gamma = bounds.lo + width * uniform01(gen);
        return f;
    };
    return rejection_sample<AmplitudeDampingFamily>(draw, seed);
}

DensityMatrix random_state(FamilyKind kind, CoherenceBounds bounds, std::uint64_t seed) {
    if (kind == FamilyKind::Dephasing)
        return build_dephasing_state(random_dephasing_family({}, bounds, seed));
    return build_ad_state(random_ad_family({}, bounds, seed));
}

// -- information measures -----------------------------------------------------

double l1_coherence(const DensityMatrix& rho) {
    double total = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) total += std::abs(rho(i, j));
    return total;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    double s = 0.0;
    for (double lambda : rho.eigenvalues()) s -= xlogx(lambda);
    return s;
}

double relative_coherence(const DensityMatrix& rho) {
    if (l1_coherence(rho) == 0.0) return 0.0;  // eigensolver roundoff would leave ~1e-16
    double s_diag = 0.0;
    for (double p : rho.populations()) s_diag -= xlogx(p);
    const double c = s_diag - von_neumann_entropy(rho);
    if (c < 0.0 && c > -1e-12) return 0.0;
    return c;
}

CoherenceReport coherence_report(const DensityMatrix& rho) {
    return {l1_coherence(rho), relative_coherence(rho)};
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
    const auto es = eigensolve(sigma.matrix(), true);
    const Eigen::Vector4d mu = es.eigenvalues();
    if (mu.minCoeff() < 1e-14)
        throw SingularReference("relative entropy: reference state is rank deficient");
    const Matrix4c log_sigma =
        es.eigenvectors() * mu.array().log().matrix().cast<Complex>().asDiagonal() *
        es.eigenvectors().adjoint();
    double rho_log_rho = 0.0;
    for (double lambda : rho.eigenvalues()) rho_log_rho += xlogx(lambda);
    const double cross = (rho.matrix() * log_sigma).trace().real();
    return rho_log_rho - cross;
}

double beta_from_occupation(double nbar, double eps) {
    if (!(nbar >= 0.0)) throw InvalidConfig("nbar", "bath occupation must be >= 0");
    if (!(eps > 0.0)) throw InvalidConfig("eps", "level splitting must be > 0");
    if (nbar == 0.0) return std::numeric_limits<double>::infinity();
    return std::log1p(1.0 / nbar) / eps;
}

DensityMatrix gibbs_state(double eps_a, double eps_b, double beta) {
    if (!(beta >= 0.0)) throw InvalidConfig("beta", "inverse temperature must be >= 0");
    if (!(eps_a > 0.0 && eps_b > 0.0))
        throw InvalidConfig("eps", "level splittings must be > 0");
    // Excited (sigma_z = +1) weight of a single qubit at energy +eps/2.
    auto excited = [beta](double eps) { return 1.0 / (1.0 + std::exp(beta * eps)); };
    const double pa = excited(eps_a);
    const double pb = excited(eps_b);
    return DensityMatrix::diagonal(
        {pa * pb, pa * (1.0 - pb), (1.0 - pa) * pb, (1.0 - pa) * (1.0 - pb)});
}

// -- text format --------------------------------------------------------------

std::string to_text(const DensityMatrix& rho) {
    std::string out;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const Complex z = rho(i, j);
            if (j) out += ' ';
            out += format_double(z.real());
            if (!std::signbit(z.imag())) out += '+';
            out += format_double(z.imag());
            out += 'i';
        }
        out += '\n';
    }
    return out;
}

namespace {

Complex parse_entry(std::string_view token) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto fail = [&]() -> Complex {
        throw InvalidConfig("state-file", "malformed complex entry '" + std::string(token) + "'");
    };
    double re = 0.0;
    const char* p = first;
    if (p != last && *p == '+') ++p;
    auto r = std::from_chars(p, last, re);
    if (r.ec != std::errc{}) return fail();
    p = r.ptr;
    if (p == last) return {re, 0.0};
    if (*p != '+' && *p != '-') return fail();
    const bool negative = *p == '-';
    ++p;
    double im = 0.0;
    if (p != last && *p == 'i') {
        im = 1.0;
    } else {
        auto s = std::from_chars(p, last, im);
        if (s.ec != std::errc{}) return fail();
        p = s.ptr;
    }
    if (p == last || *p != 'i' || p + 1 != last) return fail();
    return {re, negative ? -im : im};
}

} // namespace

DensityMatrix parse_state(std::string_view text) {
    std::istringstream in{std::string(text)};
    Matrix4c m;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        std::istringstream cols(line);
        std::vector<std::string> tokens;
        for (std::string tok; cols >> tok;) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (row == 4) throw InvalidConfig("state-file", "more than 4 rows");
        if (tokens.size() != 4)
            throw InvalidConfig("state-file", "row " + std::to_string(row + 1) +
                                                  " must have 4 entries");
        for (int j = 0; j < 4; ++j) m(row, j) = parse_entry(tokens[j]);
        ++row;
    }
    if (row != 4) throw InvalidConfig("state-file", "expected 4 rows, found " + std::to_string(row));
    return DensityMatrix::from_matrix(m);
}

DensityMatrix read_state_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("state-file", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_state(buf.str());
}

void write_state_file(const std::filesystem::path& path, const DensityMatrix& rho) {
    std::ofstream out(path);
    if (!out) throw InvalidConfig("state-file", "cannot write " + path.string());
    out << to_text(rho);
}

} // namespace spinphase
