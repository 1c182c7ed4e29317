#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spinphase/channels.hpp"
#include "spinphase/entropy.hpp"
#include "spinphase/errors.hpp"
#include "spinphase/experiments.hpp"
#include "spinphase/phasespace.hpp"
#include "spinphase/qstate.hpp"

namespace py = pybind11;
using namespace spinphase;

namespace {

MCConfig mc(std::uint64_t samples, std::uint64_t seed, std::uint64_t chunk) {
    MCConfig c;
    c.samples = samples;
    c.seed = seed;
    c.chunk = chunk;
    return c;
}

py::tuple estimate(const MCEstimate& e) { return py::make_tuple(e.value, e.std_error); }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-qubit spin phase-space entropy production";
    m.attr("__version__") = std::string(version());

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidState>(m, "InvalidState", base.ptr());
    py::register_exception<NotPositive>(m, "NotPositive", base.ptr());
    py::register_exception<Exhausted>(m, "Exhausted", base.ptr());
    py::register_exception<SingularReference>(m, "SingularReference", base.ptr());
    py::register_exception<NonFinite>(m, "NonFinite", base.ptr());
    py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);

    py::class_<DensityMatrix>(m, "DensityMatrix")
        .def(py::init(&DensityMatrix::from_matrix), py::arg("matrix"))
        .def_static("maximally_mixed", &DensityMatrix::maximally_mixed)
        .def_static("diagonal", &DensityMatrix::diagonal, py::arg("populations"))
        .def_property_readonly("matrix", &DensityMatrix::matrix)
        .def_property_readonly("populations", &DensityMatrix::populations)
        .def("eigenvalues", &DensityMatrix::eigenvalues)
        .def("__repr__", [](const DensityMatrix& r) { return "DensityMatrix(\n" + to_text(r) + ")"; });

    m.def("dephasing_state",
          [](const Populations& p, double alpha, double beta) {
              return build_dephasing_state({p, alpha, beta});
          },
          py::arg("populations"), py::arg("alpha") = 0.0, py::arg("beta") = 0.0);
    m.def("ad_state",
          [](const Populations& p, double alpha, double beta, double gamma) {
              return build_ad_state({p, alpha, beta, gamma});
          },
          py::arg("populations"), py::arg("alpha") = 0.0, py::arg("beta") = 0.0,
          py::arg("gamma") = 0.0);
    m.def("gibbs_state", &gibbs_state, py::arg("eps_a"), py::arg("eps_b"), py::arg("beta"));
    m.def("beta_from_occupation", &beta_from_occupation, py::arg("nbar"), py::arg("eps") = 1.0);
    m.def("l1_coherence", &l1_coherence);
    m.def("relative_coherence", &relative_coherence);
    m.def("von_neumann_entropy", &von_neumann_entropy);
    m.def("relative_entropy", &relative_entropy);
    m.def("parse_state", &parse_state);
    m.def("to_text", &to_text);

    m.def("dephasing_propagate", &dephasing_propagate, py::arg("rho"), py::arg("lam"), py::arg("t"));
    m.def("ad_propagate", &ad_propagate, py::arg("rho"), py::arg("gamma"), py::arg("nbar"),
          py::arg("t"));

    m.def("husimi",
          [](const DensityMatrix& rho, double ta, double pa, double tb, double pb) {
              const HusimiSample s = husimi(rho, PhasePoint::from_angles(ta, pa, tb, pb));
              return py::dict(py::arg("q") = s.q, py::arg("d_theta_a") = s.d_theta_a,
                              py::arg("d_phi_a") = s.d_phi_a, py::arg("d_theta_b") = s.d_theta_b,
                              py::arg("d_phi_b") = s.d_phi_b);
          },
          py::arg("rho"), py::arg("theta_a"), py::arg("phi_a"), py::arg("theta_b"), py::arg("phi_b"));

    // Monte-Carlo estimators return (value, stderr).
    m.def("wehrl_entropy",
          [](const DensityMatrix& rho, std::uint64_t samples, std::uint64_t seed, std::uint64_t chunk) {
              py::gil_scoped_release release;
              return wehrl_entropy(rho, mc(samples, seed, chunk));
          },
          py::arg("rho"), py::arg("samples") = 1'000'000, py::arg("seed") = 7, py::arg("chunk") = 4096);
    m.def("pi_dephasing",
          [](const DensityMatrix& rho, double lam, std::uint64_t samples, std::uint64_t seed,
             std::uint64_t chunk) {
              py::gil_scoped_release release;
              return pi_dephasing(rho, lam, mc(samples, seed, chunk));
          },
          py::arg("rho"), py::arg("lam"), py::arg("samples") = 1'000'000, py::arg("seed") = 7,
          py::arg("chunk") = 4096);
    m.def("ad_rates",
          [](const DensityMatrix& rho, double gamma, double nbar, std::uint64_t samples,
             std::uint64_t seed, std::uint64_t chunk) {
              EntropyRates r;
              {
                  py::gil_scoped_release release;
                  r = entropy_rates(rho, ChannelSpec::amplitude_damping(gamma, nbar),
                                    mc(samples, seed, chunk));
              }
              return py::dict(py::arg("pi") = estimate(r.pi), py::arg("phi") = estimate(r.phi),
                              py::arg("wehrl") = estimate(r.wehrl));
          },
          py::arg("rho"), py::arg("gamma"), py::arg("nbar"), py::arg("samples") = 1'000'000,
          py::arg("seed") = 7, py::arg("chunk") = 4096);
    m.def("pi_von_neumann",
          [](const DensityMatrix& rho, double gamma, double nbar) {
              const ChannelSpec spec = ChannelSpec::amplitude_damping(gamma, nbar);
              return pi_von_neumann(rho, spec, reference_state(spec));
          },
          py::arg("rho"), py::arg("gamma"), py::arg("nbar"));

    py::class_<MCEstimate>(m, "MCEstimate")
        .def_readonly("value", &MCEstimate::value)
        .def_readonly("std_error", &MCEstimate::std_error)
        .def_readonly("discarded_fraction", &MCEstimate::discarded_fraction)
        .def("__iter__", [](const MCEstimate& e) { return py::iter(estimate(e)); })
        .def("__repr__", [](const MCEstimate& e) {
            return "MCEstimate(" + format_double(e.value) + " +- " + format_double(e.std_error) + ")";
        });

    m.def("run_experiment",
          [](const std::string& experiment, std::uint64_t samples, std::uint64_t seed, int steps) {
              RunConfig cfg;
              cfg.experiment = experiment;
              cfg.mc = mc(samples, seed, 4096);
              cfg.steps = steps;
              std::ostringstream os;
              {
                  py::gil_scoped_release release;
                  const Plan plan = make_plan(cfg);
                  write_csv(os, cfg, plan, run_plan(plan, cfg.mc));
              }
              return os.str();
          },
          py::arg("experiment"), py::arg("samples") = 1'000'000, py::arg("seed") = 7,
          py::arg("steps") = 60, "Runs a named experiment and returns the CSV text.");
}
