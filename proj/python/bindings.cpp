#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "udw/harvest/output.hpp"
#include "udw/harvest/run.hpp"
#include "udw/harvest/scenario.hpp"
#include "udw/harvest/verify.hpp"
#include "udw/momentum_kernel.hpp"
#include "udw/perturbative.hpp"
#include "udw/spectra.hpp"
#include "udw/state_assembly.hpp"

namespace py = pybind11;
using namespace udw;

namespace {

std::string rows_csv(const std::vector<harvest::ResultRow>& rows) {
    std::ostringstream out;
    harvest::write_csv(out, rows);
    return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Delta-coupled detector pairs in coherent field states";

    auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<NonConvergence>(m, "NonConvergence", error.ptr());
    py::register_exception<DivergenceDetected>(m, "DivergenceDetected", error.ptr());
    py::register_exception<UnsupportedDimension>(m, "UnsupportedDimension", error.ptr());
    py::register_exception<TraceViolation>(m, "TraceViolation", error.ptr());
    py::register_exception<NotHermitian>(m, "NotHermitian", error.ptr());
    py::register_exception<BudgetExceeded>(m, "BudgetExceeded", error.ptr());
    py::register_exception<harvest::ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<harvest::ComputeError>(m, "ComputeError", error.ptr());

    py::class_<QuadratureConfig>(m, "QuadratureConfig")
        .def(py::init<>())
        .def_readwrite("rel_tol", &QuadratureConfig::rel_tol)
        .def_readwrite("abs_tol", &QuadratureConfig::abs_tol)
        .def_readwrite("max_subdivisions", &QuadratureConfig::max_subdivisions)
        .def_readwrite("radial_map_scale", &QuadratureConfig::radial_map_scale)
        .def_readwrite("ir_cutoff", &QuadratureConfig::ir_cutoff)
        .def_readwrite("uv_cutoff", &QuadratureConfig::uv_cutoff);

    py::class_<SmearingProfile>(m, "SmearingProfile")
        .def_static("pointlike", &SmearingProfile::pointlike)
        .def_static("gaussian", &SmearingProfile::gaussian, py::arg("sigma"))
        .def_static("tophat", &SmearingProfile::tophat, py::arg("radius"))
        .def_readonly("width", &SmearingProfile::width);

    py::class_<DetectorParams>(m, "Detector")
        .def(py::init([](double coupling, std::vector<double> position, SmearingProfile smearing, double switch_time,
                         double switch_weight, double gap) {
                 DetectorParams d;
                 d.coupling = coupling;
                 d.position = std::move(position);
                 d.smearing = smearing;
                 d.switch_time = switch_time;
                 d.switch_weight = switch_weight;
                 d.gap = gap;
                 return d;
             }),
             py::arg("coupling"), py::arg("position"), py::arg("smearing"), py::arg("switch_time") = 0.0,
             py::arg("switch_weight") = 1.0, py::arg("gap") = 0.0)
        .def_readwrite("coupling", &DetectorParams::coupling)
        .def_readwrite("switch_weight", &DetectorParams::switch_weight)
        .def_readwrite("switch_time", &DetectorParams::switch_time)
        .def_readwrite("gap", &DetectorParams::gap)
        .def_readwrite("position", &DetectorParams::position)
        .def_readwrite("smearing", &DetectorParams::smearing);

    py::class_<GaussianPacket>(m, "GaussianPacket")
        .def(py::init([](std::vector<double> center, double spread, double peak, double phase,
                         std::vector<double> offset) {
                 return GaussianPacket{peak, std::move(center), spread, phase, std::move(offset)};
             }),
             py::arg("center"), py::arg("spread"), py::arg("peak") = 1.0, py::arg("phase") = 0.0,
             py::arg("offset") = std::vector<double>{})
        .def_readwrite("peak", &GaussianPacket::peak)
        .def_readwrite("center", &GaussianPacket::center)
        .def_readwrite("spread", &GaussianPacket::spread)
        .def_readwrite("phase", &GaussianPacket::phase)
        .def_readwrite("offset", &GaussianPacket::offset);

    py::class_<CoherentAmplitude>(m, "CoherentAmplitude")
        .def_static("vacuum", &CoherentAmplitude::vacuum)
        .def_static("packet", &CoherentAmplitude::packet)
        .def_static("superposition", &CoherentAmplitude::superposition)
        .def("is_vacuum", &CoherentAmplitude::is_vacuum)
        .def("evaluate", [](const CoherentAmplitude& a, std::vector<double> k) { return a.evaluate(k); });

    py::class_<KernelFunctionals>(m, "KernelFunctionals")
        .def_static("single", &KernelFunctionals::single, py::arg("I_A"), py::arg("C_A"))
        .def_static("pair_from", &KernelFunctionals::pair_from, py::arg("I_A"), py::arg("I_B"), py::arg("Z"),
                    py::arg("C_A"), py::arg("C_B"), py::arg("b_first") = false)
        .def_readonly("pair", &KernelFunctionals::pair)
        .def_readonly("I_A", &KernelFunctionals::I_A)
        .def_readonly("I_B", &KernelFunctionals::I_B)
        .def_readonly("f_A", &KernelFunctionals::f_A)
        .def_readonly("f_B", &KernelFunctionals::f_B)
        .def_readonly("theta", &KernelFunctionals::theta)
        .def_readonly("omega", &KernelFunctionals::omega)
        .def_readonly("C_A", &KernelFunctionals::C_A)
        .def_readonly("C_B", &KernelFunctionals::C_B)
        .def_readonly("b_first", &KernelFunctionals::b_first);

    py::class_<SpectralReport>(m, "SpectralReport")
        .def_readonly("eig_single", &SpectralReport::eig_single)
        .def_readonly("eig_pair", &SpectralReport::eig_pair)
        .def_readonly("eig_pt", &SpectralReport::eig_pt)
        .def_readonly("negativity", &SpectralReport::negativity)
        .def_readonly("entropy_single", &SpectralReport::entropy_single)
        .def_readonly("gamma_minus", &SpectralReport::gamma_minus)
        .def_readonly("gamma_plus", &SpectralReport::gamma_plus)
        .def_readonly("physicality", &SpectralReport::physicality)
        .def_readonly("residual_closed_vs_numeric", &SpectralReport::residual_closed_vs_numeric);

    m.def(
        "self_overlap",
        [](const DetectorParams& d, int n, const QuadratureConfig& cfg) {
            const auto e = self_overlap(d, n, cfg);
            return py::make_tuple(e.value, e.error);
        },
        py::arg("detector"), py::arg("n"), py::arg("cfg") = QuadratureConfig{});
    m.def(
        "cross_overlap",
        [](const DetectorParams& a, const DetectorParams& b, int n, const QuadratureConfig& cfg) {
            const auto e = cross_overlap(a, b, n, cfg);
            return py::make_tuple(e.value, e.error);
        },
        py::arg("a"), py::arg("b"), py::arg("n"), py::arg("cfg") = QuadratureConfig{});
    m.def(
        "coherent_shift",
        [](const DetectorParams& d, const CoherentAmplitude& alpha, int n, const QuadratureConfig& cfg) {
            const auto e = coherent_shift(d, alpha, n, cfg);
            return py::make_tuple(e.value, e.error);
        },
        py::arg("detector"), py::arg("alpha"), py::arg("n"), py::arg("cfg") = QuadratureConfig{});
    m.def("kernel_functionals", &kernel_functionals, py::arg("a"), py::arg("b"), py::arg("alpha"), py::arg("n"),
          py::arg("cfg") = QuadratureConfig{});

    m.def("rho_single", [](const KernelFunctionals& kf) -> Eigen::Matrix2cd { return rho_single(kf); });
    m.def("rho_pair", [](const KernelFunctionals& kf) -> Eigen::Matrix4cd { return rho_pair(kf); });
    m.def("partial_transpose_A", &partial_transpose_A);
    m.def("eig_single_closed", &eig_single_closed);
    m.def("eig_pt_closed", &eig_pt_closed);
    m.def("spectral_report", &spectral_report);

    m.def(
        "residual_scaling",
        [](const DetectorParams& a, const std::optional<DetectorParams>& b, const CoherentAmplitude& alpha, int n,
           const std::vector<double>& lambdas, const QuadratureConfig& cfg) {
            const auto r = residual_scaling_check(a, b, alpha, n, cfg, lambdas);
            py::dict d;
            d["residuals"] = r.residuals;
            d["slope"] = r.slope;
            d["passed"] = r.passed;
            d["informational"] = r.informational;
            d["insufficient_decay"] = r.insufficient_decay;
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("alpha"), py::arg("n"), py::arg("lambdas"),
        py::arg("cfg") = QuadratureConfig{});

    m.def(
        "run_scenario",
        [](const std::string& text, int jobs, bool oracle) {
            const auto s = harvest::parse_scenario(text);
            std::vector<harvest::ResultRow> rows;
            {
                py::gil_scoped_release release;
                rows = harvest::run_sweep(s, jobs, oracle && s.oracle.has_value());
            }
            return rows_csv(rows);
        },
        py::arg("yaml_text"), py::arg("jobs") = 1, py::arg("oracle") = true,
        "Runs a YAML scenario and returns the CSV text; the oracle runs when the scenario has an oracle block.");
    m.def("csv_columns", &harvest::csv_columns);

    m.def(
        "verify",
        [](const std::string& suite, std::uint64_t seed) {
            harvest::SuiteReport r;
            {
                py::gil_scoped_release release;
                r = harvest::run_suite(suite, seed);
            }
            py::list checks;
            for (const auto& c : r.checks) {
                py::dict d;
                d["suite"] = c.suite;
                d["name"] = c.name;
                d["worst"] = c.worst;
                d["tolerance"] = c.tolerance;
                d["passed"] = c.passed;
                d["cases"] = c.cases;
                checks.append(d);
            }
            return py::make_tuple(r.passed(), checks);
        },
        py::arg("suite"), py::arg("seed") = 42);
    m.def("suite_names", &harvest::suite_names);
}
