#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinphase/channels.hpp"
#include "spinphase/entropy.hpp"
#include "spinphase/phasespace.hpp"
#include "spinphase/qstate.hpp"

namespace spinphase {

std::string_view version();

// Experiment ids accepted by the runner.
inline constexpr std::string_view kExperiments[] = {
    "fig1",  "fig2a", "fig2b", "fig2c", "fig2d", "fig3",  "fig4a",
    "fig4b", "fig4c", "fig4d", "fig5a", "fig5b", "custom"};

/// Rescaling factor for the coherence classes of a family. A single factor
/// applies to every class.
struct MuFactor {
    std::vector<double> parts;

    /// "0.5", "0.2:0.4" or "0.2:0.4:0.6".
    static MuFactor parse(std::string_view text);
    std::string str() const;
    double get(std::size_t cls) const { return parts.size() == 1 ? parts[0] : parts.at(cls); }
};

struct RunConfig {
    std::string experiment;
    MCConfig mc;
    std::optional<double> tmax;
    int steps = 60;  // grid points, both ends included
    std::optional<double> nbar;
    std::vector<MuFactor> mu;
    std::optional<std::filesystem::path> state_file;
    std::optional<std::string> channel;  // custom only: "dephasing" | "ad"

    /// Throws InvalidConfig naming the first bad field.
    void validate() const;
};

struct CurveSpec {
    std::string id;
    DensityMatrix state;
    std::string params;  // free-form "key=value ..." provenance
};

struct Plan {
    ChannelSpec channel;
    std::vector<double> grid;
    std::vector<CurveSpec> curves;
    std::vector<std::string> notes;  // extra provenance lines
};

struct CurveResult {
    std::string id;
    std::string params;
    std::vector<EntropyRecord> rows;
};

// Fixed state seeds of the random figure families.
inline constexpr std::uint64_t kFig2Seeds[] = {21, 22, 23, 24};
inline constexpr std::uint64_t kFig4Seeds[] = {41, 42, 43, 44};
inline constexpr std::uint64_t kFig5SeedA = 51;
inline constexpr std::uint64_t kFig5SeedB = 52;
inline constexpr int kFig5Curves = 4;

/// k-th random state of a fig5 panel (seed base * 1000 + k). Dephasing
/// states carry both alpha and beta, amplitude-damping states all three
/// classes, all drawn on [0, 0.25].
DensityMatrix fig5_state(FamilyKind kind, int k);

/// Every off-diagonal entry multiplied by mu.
DensityMatrix rescale_coherences(const DensityMatrix& rho, double mu);

/// Builds channel, grid and initial states of a validated config.
Plan make_plan(const RunConfig& cfg);

/// Evolves and estimates every curve on the shared sample stream of `mc`.
std::vector<CurveResult> run_plan(const Plan& plan, const MCConfig& mc);

/// One curve per mu of the coherence-rescaled base state, shared samples.
/// Throws NotPositive if a rescaled state is unphysical.
std::vector<CurveResult> scan_rescale(const DensityMatrix& base, std::span<const double> mu,
                                      const ChannelSpec& channel, std::span<const double> grid,
                                      const MCConfig& mc);

inline constexpr std::string_view kCsvHeader =
    "curve_id,t,pi,pi_stderr,phi,phi_stderr,wehrl,wehrl_stderr,pi_vn,c_l1,c_rel";

void write_csv(std::ostream& os, const RunConfig& cfg, const Plan& plan,
               const std::vector<CurveResult>& results);

/// Shortest round-trip decimal form.
std::string format_double(double x);

} // namespace spinphase
