// Python bindings: parameter trees, simulations with numpy state access,
// the transform layer and the bench entry point.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "spectralkit/bench.hpp"
#include "spectralkit/errors.hpp"
#include "spectralkit/fft.hpp"
#include "spectralkit/grid.hpp"
#include "spectralkit/output.hpp"
#include "spectralkit/simulation.hpp"
#include "spectralkit/state.hpp"

namespace py = pybind11;
using namespace spectralkit;

namespace {

std::vector<int> array_shape(const py::array& a) {
    std::vector<int> n;
    for (py::ssize_t d = 0; d < a.ndim(); ++d)
        n.push_back(static_cast<int>(a.shape(d)));
    return n;
}

py::array_t<double> phys_to_numpy(const SpectralGrid& g, const real_field& u) {
    std::vector<py::ssize_t> shape(g.n.begin(), g.n.end());
    py::array_t<double> out(shape);
    std::memcpy(out.mutable_data(), u.data(), u.size() * sizeof(double));
    return out;
}

py::dict summary_to_dict(const RunSummary& s) {
    py::dict d;
    d["iterations"] = s.iterations;
    d["t_final"] = s.t_final;
    d["walltime"] = s.walltime;
    d["kernel_seconds"] = s.kernel_seconds;
    return d;
}

py::dict report_to_dict(const BenchReport& r) {
    py::dict d;
    d["solver"] = r.solver;
    d["label"] = r.label;
    d["n"] = r.n;
    d["workers"] = r.workers;
    d["iterations"] = r.iterations;
    d["elapsed_total"] = r.elapsed_total;
    d["elapsed_per_iter"] = r.elapsed_per_iter;
    d["kernel_timers"] = r.kernel_timers;
    d["seed"] = r.seed;
    d["dt"] = r.dt;
    d["state_checksum"] = r.state_checksum;
    d["host"] = r.host;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "pseudo-spectral PDE solvers on periodic grids";
    ensure_builtin_solvers();

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<ShapeError>(m, "ShapeError");
    py::register_exception<RegistryError>(m, "RegistryError");
    py::register_exception<DivergenceError>(m, "DivergenceError");
    py::register_exception<IoError>(m, "IoError");

    py::class_<ParamTree>(m, "ParamTree")
        .def("get", [](const ParamTree& p, const std::string& path) { return p.value(path); })
        .def("set", [](ParamTree& p, const std::string& path, ParamValue v) { p.set(path, std::move(v)); })
        .def("set_from_string", &ParamTree::set_from_string)
        .def("leaf_paths", &ParamTree::leaf_paths)
        .def("serialize", &ParamTree::serialize)
        .def_static("deserialize", &ParamTree::deserialize)
        .def("__eq__", [](const ParamTree& a, const ParamTree& b) { return a == b; })
        .def("__repr__", [](const ParamTree& p) { return p.serialize(); });

    m.def("registered_solvers", [] { return registered_solvers(); });
    m.def("create_default_params", &create_default_params, py::arg("solver"));
    m.def("params_digest", &params_digest);

    py::class_<Simulation>(m, "Simulation")
        .def(py::init<const ParamTree&>(), py::arg("params"))
        .def_property_readonly("t", &Simulation::t)
        .def_property_readonly("iteration", &Simulation::iteration)
        .def_property_readonly("last_dt", &Simulation::last_dt)
        .def_property_readonly("solver_name",
                               [](const Simulation& s) { return s.info().short_name; })
        .def_property_readonly("shape", [](const Simulation& s) { return s.oper().n; })
        .def_property_readonly(
            "dir", [](Simulation& s) { return std::string(s.output().dir()); })
        .def_property_readonly("state_keys", [](const Simulation& s) {
            return s.state().keys_state_phys();
        })
        .def_property_readonly("computable_keys", [](const Simulation& s) {
            return s.state().keys_computable();
        })
        .def("params", &Simulation::params,
             py::return_value_policy::copy)
        .def("energy", &Simulation::energy)
        .def("enstrophy", &Simulation::enstrophy)
        .def("dissipation_rate", &Simulation::dissipation_rate)
        .def("last_injection", &Simulation::last_injection)
        .def("compute_dt", &Simulation::compute_dt)
        .def("set_fixed_dt", &Simulation::set_fixed_dt)
        .def("set_n_iters", &Simulation::set_n_iters)
        .def("set_t_end", &Simulation::set_t_end)
        .def("set_quiet", &Simulation::set_quiet)
        .def("step", &Simulation::step_once)
        .def("run", [](Simulation& s) { return summary_to_dict(s.run()); })
        .def("get_phys",
             [](Simulation& s, const std::string& key) {
                 real_field out;
                 s.state().compute_field(key, out);
                 return phys_to_numpy(s.oper(), out);
             },
             py::arg("key"), "Physical-space values of a state or computable field.")
        .def("set_phys",
             [](Simulation& s, const std::string& key,
                py::array_t<double, py::array::c_style | py::array::forcecast> u) {
                 if (array_shape(u) != s.oper().n)
                     throw ShapeError("array shape does not match the grid");
                 real_field v(u.data(), u.data() + u.size());
                 s.state().load_phys(key, v);
             },
             py::arg("key"), py::arg("values"),
             "Replace one state variable from physical-space values.");

    m.def("load_sim_for_plot", &load_sim_for_plot, py::arg("dir"));
    m.def("load_state_phys_file", &load_state_phys_file, py::arg("dir"),
          py::arg("time") = -1.0);

    // Transform layer.  Forward includes the 1/N amplitude normalization;
    // inverse(forward(u)) = u.
    m.def("fft_forward",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> u) {
              auto plan = plan_fft(array_shape(u));
              std::vector<py::ssize_t> sshape(plan->spect_shape().begin(),
                                              plan->spect_shape().end());
              py::array_t<std::complex<double>> out(sshape);
              plan->forward(u.data(), out.mutable_data());
              return out;
          },
          py::arg("u"));
    m.def("fft_inverse",
          [](py::array_t<std::complex<double>,
                         py::array::c_style | py::array::forcecast> uhat,
             std::vector<int> phys_shape) {
              auto plan = plan_fft(phys_shape);
              if (array_shape(uhat) != plan->spect_shape())
                  throw ShapeError("spectral array does not match phys_shape");
              std::vector<py::ssize_t> pshape(phys_shape.begin(), phys_shape.end());
              py::array_t<double> out(pshape);
              plan->inverse(uhat.data(), out.mutable_data());
              return out;
          },
          py::arg("uhat"), py::arg("phys_shape"));
    m.def("fft_workers", &fft_workers);
    m.def("set_fft_workers", &set_fft_workers);

    m.def("run_bench",
          [](const std::string& solver, const std::vector<int>& n, long iters,
             int workers, std::uint64_t seed) {
              return report_to_dict(run_bench(solver, n, iters, workers, seed));
          },
          py::arg("solver"), py::arg("n"), py::arg("iters") = 20,
          py::arg("workers") = 1, py::arg("seed") = 1);
}
