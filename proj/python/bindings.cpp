#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chainforge/disorder.hpp"
#include "chainforge/dynamics.hpp"
#include "chainforge/error.hpp"
#include "chainforge/io.hpp"
#include "chainforge/service.hpp"

namespace py = pybind11;
using namespace chainforge;

namespace {

py::object to_python(const io::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

template <typename Span>
std::vector<double> to_vector(Span s) {
  return {s.begin(), s.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Persymmetric spin chains with prescribed spectra";
  m.attr("__version__") = CHAINFORGE_VERSION;

  static py::handle error = py::exception<Error>(m, "ChainforgeError", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("index") = e.index() ? py::cast(*e.index()) : py::none();
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<Spectrum>(m, "Spectrum")
      .def(py::init([](std::vector<double> values) { return Spectrum(std::move(values)); }), py::arg("values"))
      .def_property_readonly("values", [](const Spectrum& s) { return to_vector(s.values()); })
      .def_property_readonly("family", [](const Spectrum& s) { return std::string(to_string(s.family())); })
      .def_property_readonly("shift", [](const Spectrum& s) { return s.params().C; })
      .def("__len__", &Spectrum::size)
      .def("to_json", [](const Spectrum& s) { return to_python(io::to_json(s)); })
      .def("__repr__", [](const Spectrum& s) {
        return "<Spectrum " + std::string(to_string(s.family())) + " N=" + std::to_string(s.size()) + ">";
      });

  py::class_<ChainCouplings>(m, "ChainCouplings")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("a"), py::arg("b"))
      .def_property_readonly("a", [](const ChainCouplings& c) { return to_vector(c.a()); })
      .def_property_readonly("b", [](const ChainCouplings& c) { return to_vector(c.b()); })
      .def("is_persymmetric", &ChainCouplings::is_persymmetric)
      .def("__len__", &ChainCouplings::size)
      .def("to_json", [](const ChainCouplings& c) { return to_python(io::to_json(c)); })
      .def_static("uniform", &ChainCouplings::uniform, py::arg("n"), py::arg("b") = 1.0);

  py::class_<EigenSystem>(m, "EigenSystem")
      .def_property_readonly("eigenvalues", [](const EigenSystem& es) { return to_vector(es.eigenvalues()); })
      .def("eigenvector", [](const EigenSystem& es, std::size_t k) {
        if (k >= es.size()) throw py::index_error("eigenvector index out of range");
        return to_vector(es.eigenvector(k));
      })
      .def("__len__", &EigenSystem::size);

  m.def("generate_linear", &generate_linear, py::arg("n"), py::arg("a") = 1);
  m.def("generate_inverted_quadratic", &generate_inverted_quadratic, py::arg("n"));
  m.def("generate_cosine", &generate_cosine, py::arg("n"));
  m.def("shift_spectrum", &shift_spectrum, py::arg("spectrum"), py::arg("c"));
  m.def("verify_pst",
        [](const Spectrum& s, double tau, double tol) { return to_python(io::to_json(verify_pst(s, tau, tol))); },
        py::arg("spectrum"), py::arg("tau"), py::arg("tolerance") = 1e-9);
  m.def("weighted_variance", &weighted_variance, py::arg("spectrum"));
  m.def("boundary_metric", &boundary_metric, py::arg("spectrum"), py::arg("central_count") = 0);

  m.def("compute_weights", &compute_weights, py::arg("spectrum"));
  m.def("solve", &solve, py::arg("spectrum"));
  m.def("forward_eigenvalues", [](const ChainCouplings& c) { return to_vector(forward_eigenvalues(c).values()); },
        py::arg("chain"));

  m.def("eigendecompose", py::overload_cast<const ChainCouplings&>(&eigendecompose), py::arg("chain"));
  m.def("transfer_overlap", &transfer_overlap, py::arg("eigensystem"), py::arg("t"));
  m.def("overlap_trace",
        [](const EigenSystem& es, std::vector<double> t) { return overlap_trace(es, t); },
        py::arg("eigensystem"), py::arg("t"));
  m.def("average_fidelity", &average_fidelity, py::arg("f"));
  m.def("default_transfer_time", &default_transfer_time, py::arg("chain"));
  m.def("effective_model", [](const ChainCouplings& c) { return to_python(io::to_json(effective_model(c))); },
        py::arg("chain"));
  m.def("central_splitting", &central_splitting, py::arg("chain"));

  m.def("fit_beta", [](std::vector<double> samples) { return to_python(io::to_json(fit_beta(samples))); },
        py::arg("samples"));
  m.def(
      "run_experiment",
      [](const ChainCouplings& c, double r, std::size_t samples, std::uint64_t seed, double tau, std::size_t bins,
         std::size_t threads) {
        DisorderConfig cfg{r, samples, seed, tau, bins, threads};
        io::json report;
        {
          py::gil_scoped_release release;
          report = io::to_json(run_experiment(c, cfg), cfg);
        }
        return to_python(report);
      },
      py::arg("chain"), py::arg("r"), py::arg("samples"), py::arg("seed"), py::arg("tau"), py::arg("bins") = 50,
      py::arg("threads") = 0);

  m.def("presets", [] { return to_python(service::presets()); });
}
