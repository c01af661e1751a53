#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "polyboltz/cli.hpp"
#include "polyboltz/collision_operator.hpp"
#include "polyboltz/errors.hpp"
#include "polyboltz/frequency.hpp"
#include "polyboltz/kinematics.hpp"
#include "polyboltz/linearized.hpp"
#include "polyboltz/spectral.hpp"

namespace py = pybind11;
using namespace polyboltz;

namespace {

QuadratureSpec mc(std::uint64_t samples, std::uint64_t seed) {
    QuadratureSpec q;
    q.samples = samples;
    q.seed = seed;
    return q;
}

// Python callbacks need the GIL; the library calls phase functions from OpenMP workers.
// Run them single-threaded and take the GIL per call.
PhaseFunction wrap(py::function fn) {
    return [fn = std::move(fn)](const Vec3& v, double I) {
        py::gil_scoped_acquire gil;
        return fn(v, I).cast<double>();
    };
}

template <class F>
auto single_threaded(F&& f) {
    const int saved = num_threads();
    set_num_threads(1);
    try {
        auto out = f();
        set_num_threads(saved);
        return out;
    } catch (...) {
        set_num_threads(saved);
        throw;
    }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Polyatomic Boltzmann collision operator: quadratures, linearization and spectra";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<BasisError>(m, "BasisError", PyExc_RuntimeError);

    py::class_<ParticleState>(m, "ParticleState")
        .def(py::init([](const Vec3& v, double I) { return ParticleState{v, I}; }), py::arg("v"), py::arg("I"))
        .def_readwrite("v", &ParticleState::v)
        .def_readwrite("I", &ParticleState::I);

    py::class_<CollisionParams>(m, "CollisionParams")
        .def(py::init([](double r, double R, const Vec3& omega) { return CollisionParams{r, R, omega}; }),
             py::arg("r"), py::arg("R"), py::arg("omega"))
        .def_readwrite("r", &CollisionParams::r)
        .def_readwrite("R", &CollisionParams::R)
        .def_readwrite("omega", &CollisionParams::omega);

    py::class_<Estimate>(m, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("std_err", &Estimate::std_err)
        .def_readonly("samples", &Estimate::samples)
        .def("__repr__", [](const Estimate& e) {
            return "Estimate(" + format_double(e.value) + " ± " + format_double(e.std_err) + ")";
        });

    py::class_<GasSpec>(m, "GasSpec")
        .def(py::init([](double alpha, double gamma) {
                 GasSpec g{alpha, gamma, {}};
                 g.validate();
                 return g;
             }),
             py::arg("alpha") = 0.5, py::arg("gamma") = 0.0)
        .def_readonly("alpha", &GasSpec::alpha)
        .def_readonly("gamma", &GasSpec::gamma);
    m.def("alpha_from_molecule", &alpha_from_molecule, py::arg("atoms"), py::arg("vibrating") = false,
          py::arg("linear") = true);

    py::class_<CrossSectionModel>(m, "CrossSectionModel")
        .def_static("total_energy", &CrossSectionModel::total_energy, py::arg("c") = 1.0, py::arg("energy_form") = false)
        .def_static("partitioned", &CrossSectionModel::partitioned, py::arg("c") = 1.0)
        .def_static("angular_weighted", &CrossSectionModel::angular_weighted, py::arg("b") = 1.0)
        .def_property_readonly("name", &CrossSectionModel::name);

    m.def("total_energy", &total_energy, py::arg("s"), py::arg("s_star"));
    m.def("post_collision", &post_collision, py::arg("s"), py::arg("s_star"), py::arg("params"));
    m.def("bl_jacobian", &bl_jacobian, py::arg("R"), py::arg("E"));
    m.def("maxwellian", &maxwellian, py::arg("alpha"), py::arg("v"), py::arg("I"));
    m.def("eval_B",
          py::overload_cast<const CrossSectionModel&, const GasSpec&, const ParticleState&, const ParticleState&,
                            const CollisionParams&>(&eval_B),
          py::arg("model"), py::arg("gas"), py::arg("s"), py::arg("s_star"), py::arg("params"));

    m.def(
        "verify_assumptions",
        [](const CrossSectionModel& model, const GasSpec& gas, std::uint64_t samples, std::uint64_t seed) {
            py::dict out;
            for (const auto& c : verify_assumptions(model, gas, mc(samples, seed)).checks)
                out[py::str(c.name)] = py::make_tuple(c.pass, c.detail);
            return out;
        },
        py::arg("model"), py::arg("gas"), py::arg("samples") = 10000, py::arg("seed"));

    m.def(
        "eval_nu",
        [](const ParticleState& s, const GasSpec& gas, const CrossSectionModel& model, std::uint64_t samples,
           std::uint64_t seed) { return eval_nu(s, gas, model, mc(samples, seed)); },
        py::arg("s"), py::arg("gas"), py::arg("model"), py::arg("samples") = 200000, py::arg("seed"));

    m.def(
        "eval_Q",
        [](py::function f, const ParticleState& s, const GasSpec& gas, const CrossSectionModel& model,
           std::uint64_t samples, std::uint64_t seed) {
            const Distribution d{wrap(std::move(f)), 8.0, 40.0, "python"};
            return single_threaded([&] {
                py::gil_scoped_release release;
                return eval_Q(d, s, gas, model, mc(samples, seed));
            });
        },
        py::arg("f"), py::arg("s"), py::arg("gas"), py::arg("model"), py::arg("samples") = 20000, py::arg("seed"));

    m.def(
        "entropy_production",
        [](const std::string& perturbation, const GasSpec& gas, const CrossSectionModel& model, std::uint64_t samples,
           std::uint64_t seed) {
            const Distribution f = perturbed_maxwellian(gas, named_perturbation(perturbation), perturbation);
            py::gil_scoped_release release;
            return entropy_production(f, gas, model, mc(samples, seed));
        },
        py::arg("perturbation"), py::arg("gas"), py::arg("model"), py::arg("samples") = 100000, py::arg("seed"));

    py::enum_<KernelId>(m, "KernelId").value("K1", KernelId::K1).value("K2", KernelId::K2).value("K3", KernelId::K3);
    m.def(
        "hs_norm_estimate",
        [](KernelId which, const GasSpec& gas, const CrossSectionModel& model, std::uint64_t samples,
           std::uint64_t seed) {
            HsLadder l;
            {
                py::gil_scoped_release release;
                l = hs_norm_estimate(which, gas, model, mc(samples, seed));
            }
            std::vector<double> values;
            for (const auto& e : l.values) values.push_back(e.value);
            return py::make_tuple(verdict_name(l.verdict), l.margins, values);
        },
        py::arg("which"), py::arg("gas"), py::arg("model"), py::arg("samples") = 100000, py::arg("seed"));

    m.def(
        "spectrum",
        [](int n_v, int n_i, const GasSpec& gas, const CrossSectionModel& model, std::uint64_t samples,
           std::uint64_t seed) {
            const HermiteLaguerreBasis basis({n_v, n_i}, gas.alpha);
            Spectrum s;
            {
                py::gil_scoped_release release;
                s = spectrum(assemble(basis, gas, model, mc(samples, seed)));
            }
            py::dict out;
            out["eigenvalues"] = s.eigenvalues;
            out["tol0"] = s.tol0;
            out["kernel_dim"] = s.kernel_dim;
            out["positive"] = s.positive;
            out["gap"] = s.gap;
            return out;
        },
        py::arg("n_v"), py::arg("n_i"), py::arg("gas"), py::arg("model"), py::arg("samples") = 4000, py::arg("seed"));

    m.def(
        "run",
        [](const std::string& command, const std::string& config_json, const std::filesystem::path& out_dir) {
            const RunConfig cfg = parse_config(nlohmann::json::parse(config_json));
            RunOutcome o;
            {
                py::gil_scoped_release release;
                o = run(command, cfg, out_dir);
            }
            return py::make_tuple(o.exit_code, o.failures);
        },
        py::arg("command"), py::arg("config_json"), py::arg("out_dir"),
        "Runs a CLI command from a JSON config string; returns (exit_code, failures).");

    m.def("set_num_threads", &set_num_threads, py::arg("n"));
    m.def("num_threads", &num_threads);
}
