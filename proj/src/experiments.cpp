#include "spinphase/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <type_traits>
#include <utility>

#include "spinphase/errors.hpp"

#ifndef SPINPHASE_VERSION
#define SPINPHASE_VERSION "0.0.0"
#endif

namespace spinphase {

namespace {

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

bool is_ad_experiment(const RunConfig& cfg) {
    const std::string& e = cfg.experiment;
    if (e == "custom") return cfg.channel && *cfg.channel == "ad";
    return e == "fig3" || starts_with(e, "fig4") || e == "fig5b";
}

// Classes per family-type; zero for experiments that take no --mu.
std::size_t mu_classes(std::string_view e) {
    if (starts_with(e, "fig2")) return 2;
    if (starts_with(e, "fig4")) return 3;
    if (e == "custom") return 1;
    return 0;
}

double parse_number(std::string_view text, const char* field) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidConfig(field, "not a number: '" + std::string(text) + "'");
    return v;
}

std::vector<MuFactor> default_mu(std::string_view e) {
    std::vector<MuFactor> out;
    if (e == "fig2d") {
        for (auto [a, b] : {std::pair{0.2, 0.4}, {0.4, 0.6}, {0.6, 0.8}, {0.8, 1.0}})
            out.push_back(MuFactor{{a, b}});
    } else if (e == "custom") {
        out.push_back(MuFactor{{1.0}});
    } else {
        for (double m : {0.25, 0.5, 0.75, 1.0}) out.push_back(MuFactor{{m}});
    }
    return out;
}

std::string populations_str(const Populations& p) {
    return format_double(p[0]) + ":" + format_double(p[1]) + ":" + format_double(p[2]) + ":" +
           format_double(p[3]);
}

std::string family_params(const DephasingFamily& f) {
    return "alpha=" + format_double(f.alpha) + " beta=" + format_double(f.beta);
}

std::string family_params(const AmplitudeDampingFamily& f) {
    return "alpha=" + format_double(f.alpha) + " beta=" + format_double(f.beta) +
           " gamma=" + format_double(f.gamma);
}

template <class Family, class Build>
void add_scan(Plan& plan, const Family& base, const std::vector<MuFactor>& mus, Build build) {
    for (const MuFactor& m : mus) {
        Family f;
        if constexpr (std::is_same_v<Family, DephasingFamily>)
            f = base.rescaled(m.get(0), m.get(1));
        else
            f = base.rescaled(m.get(0), m.get(1), m.get(2));
        DensityMatrix rho = build(f);
        const std::string params =
            family_params(f) + " c_l1=" + format_double(l1_coherence(rho));
        plan.curves.push_back({"mu=" + m.str(), std::move(rho), params});
    }
}

ChannelSpec ad_channel(double nbar) {
    // Gamma chosen so that gamma_bar = 1: time is measured in units of 1/gamma_bar.
    return ChannelSpec::amplitude_damping(1.0 / (2.0 * nbar + 1.0), nbar);
}

std::string channel_str(const ChannelSpec& c) {
    if (c.kind == ChannelKind::Dephasing) return "dephasing lambda=" + format_double(c.a.rate);
    return "amplitude_damping gamma=" + format_double(c.a.rate) + " nbar=" + format_double(c.a.nbar) +
           " gamma_bar=" + format_double(c.gamma_bar()) + " eps_a=" + format_double(c.eps_a) +
           " eps_b=" + format_double(c.eps_b);
}

} // namespace

std::string_view version() { return SPINPHASE_VERSION; }

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

MuFactor MuFactor::parse(std::string_view text) {
    MuFactor m;
    while (true) {
        const std::size_t colon = text.find(':');
        const double v = parse_number(text.substr(0, colon), "mu");
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidConfig("mu", "factors must be finite and >= 0");
        m.parts.push_back(v);
        if (colon == std::string_view::npos) break;
        text.remove_prefix(colon + 1);
    }
    return m;
}

std::string MuFactor::str() const {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s += ':';
        s += format_double(parts[i]);
    }
    return s;
}

void RunConfig::validate() const {
    if (std::find(std::begin(kExperiments), std::end(kExperiments), experiment) ==
        std::end(kExperiments))
        throw InvalidConfig("experiment", "unknown experiment '" + experiment + "'");
    mc.validate();
    if (tmax && (!(*tmax > 0.0) || !std::isfinite(*tmax)))
        throw InvalidConfig("tmax", "must be finite and > 0");
    if (steps < 2) throw InvalidConfig("steps", "need at least 2 grid points");

    const bool custom = experiment == "custom";
    if (custom) {
        if (!channel) throw InvalidConfig("channel", "required for custom runs");
        if (*channel != "dephasing" && *channel != "ad")
            throw InvalidConfig("channel", "expected 'dephasing' or 'ad'");
        if (!state_file) throw InvalidConfig("state-file", "required for custom runs");
    } else {
        if (channel) throw InvalidConfig("channel", "only used by custom runs");
        if (state_file) throw InvalidConfig("state-file", "only used by custom runs");
    }
    if (nbar) {
        if (!is_ad_experiment(*this))
            throw InvalidConfig("nbar", "only used by amplitude-damping experiments");
        if (!(*nbar >= 0.0) || !std::isfinite(*nbar)) throw InvalidConfig("nbar", "must be finite and >= 0");
    }
    if (!mu.empty()) {
        const std::size_t classes = mu_classes(experiment);
        if (classes == 0) throw InvalidConfig("mu", "not used by " + experiment);
        for (const MuFactor& m : mu)
            if (m.parts.size() != 1 && m.parts.size() != classes)
                throw InvalidConfig("mu", "'" + m.str() + "' needs 1 or " + std::to_string(classes) +
                                              " factors");
    }
}

DensityMatrix fig5_state(FamilyKind kind, int k) {
    const CoherenceBounds bounds{0.0, 0.25};
    if (kind == FamilyKind::Dephasing)
        return build_dephasing_state(
            random_dephasing_family({true, true, false}, bounds, kFig5SeedA * 1000 + k));
    return build_ad_state(random_ad_family({true, true, true}, bounds, kFig5SeedB * 1000 + k));
}

DensityMatrix rescale_coherences(const DensityMatrix& rho, double mu) {
    Matrix4c m = rho.matrix();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) m(i, j) *= mu;
    return DensityMatrix::from_matrix(m);
}

Plan make_plan(const RunConfig& cfg) {
    cfg.validate();
    const std::string& e = cfg.experiment;
    const bool ad = is_ad_experiment(cfg);
    Plan plan;

    if (ad) {
        const double default_nbar = e == "fig3" ? 1.5 : 0.5;
        plan.channel = ad_channel(cfg.nbar.value_or(default_nbar));
    } else {
        plan.channel = ChannelSpec::dephasing(1.0);
    }
    plan.grid = time_grid(cfg.tmax.value_or(ad ? 5.0 : 3.0), cfg.steps);
    const std::vector<MuFactor> mus = cfg.mu.empty() ? default_mu(e) : cfg.mu;

    if (e == "fig1") {
        // Equal l1 coherence 0.14: 4 alpha = 8 beta.
        const DephasingFamily x{{0.25, 0.25, 0.25, 0.25}, 0.035, 0.0};
        const DephasingFamily non_x{{0.25, 0.25, 0.25, 0.25}, 0.0, 0.0175};
        for (auto [id, f] : {std::pair{"x_state", x}, {"non_x", non_x}}) {
            DensityMatrix rho = build_dephasing_state(f);
            const std::string params = family_params(f) + " c_l1=" + format_double(l1_coherence(rho));
            plan.curves.push_back({id, std::move(rho), params});
        }
        plan.notes.push_back("populations=0.25:0.25:0.25:0.25");
    } else if (starts_with(e, "fig2")) {
        const int panel = e.back() - 'a';
        const ActiveClasses classes{panel != 1, panel != 0, false};
        const CoherenceBounds bounds = panel < 2 ? CoherenceBounds{0.0, 0.25} : CoherenceBounds{0.0, 0.5};
        const std::uint64_t seed = kFig2Seeds[panel];
        const DephasingFamily base = random_dephasing_family(classes, bounds, seed);
        add_scan(plan, base, mus, build_dephasing_state);
        plan.notes.push_back("state_seed=" + std::to_string(seed) + " bounds=" + format_double(bounds.lo) +
                             ":" + format_double(bounds.hi) + " populations=" +
                             populations_str(base.populations) + " " + family_params(base));
    } else if (e == "fig3") {
        const AmplitudeDampingFamily f{{0.1, 0.2, 0.1, 0.6}, 0.02, 0.15, 0.02};
        DensityMatrix rho = build_ad_state(f);
        const std::string params = family_params(f) + " c_l1=" + format_double(l1_coherence(rho));
        plan.curves.push_back({"fig3", std::move(rho), params});
        plan.notes.push_back("populations=" + populations_str(f.populations));
    } else if (starts_with(e, "fig4")) {
        const int panel = e.back() - 'a';
        const ActiveClasses classes =
            panel == 3 ? ActiveClasses{true, true, true}
                       : ActiveClasses{panel == 0, panel == 1, panel == 2};
        const CoherenceBounds bounds{0.0, 0.25};
        const std::uint64_t seed = kFig4Seeds[panel];
        const AmplitudeDampingFamily base = random_ad_family(classes, bounds, seed);
        add_scan(plan, base, mus, build_ad_state);
        plan.notes.push_back("state_seed=" + std::to_string(seed) + " bounds=0:0.25 populations=" +
                             populations_str(base.populations) + " " + family_params(base));
    } else if (starts_with(e, "fig5")) {
        const FamilyKind kind = e == "fig5a" ? FamilyKind::Dephasing : FamilyKind::AmplitudeDamping;
        const std::uint64_t base_seed = kind == FamilyKind::Dephasing ? kFig5SeedA : kFig5SeedB;
        for (int k = 0; k < kFig5Curves; ++k) {
            DensityMatrix rho = fig5_state(kind, k);
            const std::string params = "state_seed=" + std::to_string(base_seed * 1000 + k) +
                                       " populations=" + populations_str(rho.populations()) +
                                       " c_l1=" + format_double(l1_coherence(rho));
            plan.curves.push_back({"state_" + std::to_string(k), std::move(rho), params});
        }
        plan.notes.push_back("bounds=0:0.25");
    } else {  // custom
        const DensityMatrix base = read_state_file(*cfg.state_file);
        for (const MuFactor& m : mus) {
            DensityMatrix rho = rescale_coherences(base, m.get(0));
            const std::string params = "c_l1=" + format_double(l1_coherence(rho));
            plan.curves.push_back({"mu=" + m.str(), std::move(rho), params});
        }
    }
    return plan;
}

std::vector<CurveResult> run_plan(const Plan& plan, const MCConfig& mc) {
    std::vector<Trajectory> trajectories;
    for (const CurveSpec& c : plan.curves) trajectories.push_back(evolve(c.state, plan.channel, plan.grid));
    std::vector<std::vector<EntropyRecord>> rows = entropy_curves(trajectories, plan.channel, mc);
    std::vector<CurveResult> out;
    out.reserve(plan.curves.size());
    for (std::size_t i = 0; i < plan.curves.size(); ++i)
        out.push_back({plan.curves[i].id, plan.curves[i].params, std::move(rows[i])});
    return out;
}

std::vector<CurveResult> scan_rescale(const DensityMatrix& base, std::span<const double> mu,
                                      const ChannelSpec& channel, std::span<const double> grid,
                                      const MCConfig& mc) {
    Plan plan;
    plan.channel = channel;
    plan.grid.assign(grid.begin(), grid.end());
    for (double m : mu) {
        DensityMatrix rho = rescale_coherences(base, m);
        const std::string params = "c_l1=" + format_double(l1_coherence(rho));
        plan.curves.push_back({"mu=" + format_double(m), std::move(rho), params});
    }
    return run_plan(plan, mc);
}

void write_csv(std::ostream& os, const RunConfig& cfg, const Plan& plan,
               const std::vector<CurveResult>& results) {
    os << "# spinphase " << version() << '\n';
    os << "# experiment=" << cfg.experiment << " tmax=" << format_double(plan.grid.back())
       << " steps=" << plan.grid.size();
    if (cfg.nbar) os << " nbar=" << format_double(*cfg.nbar);
    if (!cfg.mu.empty()) {
        os << " mu=";
        for (std::size_t i = 0; i < cfg.mu.size(); ++i) os << (i ? "," : "") << cfg.mu[i].str();
    }
    if (cfg.channel) os << " channel=" << *cfg.channel;
    if (cfg.state_file) os << " state_file=" << cfg.state_file->string();
    os << '\n';
    os << "# mc samples=" << cfg.mc.samples << " seed=" << cfg.mc.seed << " chunk=" << cfg.mc.chunk
       << '\n';
    os << "# channel " << channel_str(plan.channel) << '\n';
    os << "# time_unit=" << (plan.channel.kind == ChannelKind::Dephasing ? "1/lambda" : "1/gamma_bar")
       << '\n';
    for (const std::string& n : plan.notes) os << "# " << n << '\n';

    double discarded = 0.0;
    for (const CurveResult& r : results) {
        os << "# curve " << r.id << ' ' << r.params << '\n';
        for (const EntropyRecord& row : r.rows) discarded = std::max(discarded, row.discarded_fraction);
    }
    os << "# max_discarded_fraction=" << format_double(discarded) << '\n';

    os << kCsvHeader << '\n';
    for (const CurveResult& r : results)
        for (const EntropyRecord& row : r.rows) {
            os << r.id;
            for (double v : {row.t, row.pi, row.pi_stderr, row.phi, row.phi_stderr, row.wehrl,
                             row.wehrl_stderr, row.pi_vn, row.c_l1, row.c_rel})
                os << ',' << format_double(v);
            os << '\n';
        }
}

} // namespace spinphase
