#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "latsel/baselines.hpp"
#include "latsel/experiment.hpp"
#include "latsel/inner.hpp"
#include "latsel/models.hpp"
#include "latsel/robust.hpp"
#include "latsel/sfm.hpp"

namespace py = pybind11;
using namespace latsel;

namespace {

InstanceSpec make_instance(const std::string& kind, std::size_t n, std::uint64_t seed, double lambda,
                           const std::string& penalty) {
    if (kind == "regression") return gen_regression_instance(n, seed, lambda, parse_penalty(penalty));
    if (kind == "denoising") return gen_denoising_instance(n, seed, 0.8, lambda);
    throw InvalidArgument("instance kind must be 'regression' or 'denoising'");
}

py::dict solve(const InstanceSpec& inst, const std::string& solver, double tol, std::size_t max_iter) {
    CompositeFunction comp(inst.fspec, inst.g);
    SfmResult r;
    if (solver == "minnorm") {
        MinNormOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        r = minimize_submodular(comp.as_set_function(), o);
    } else if (solver == "pgd") {
        PgdOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        r = pgd_lovasz_minimize(comp, o).result;
    } else if (solver == "bruteforce") {
        r = minimize_bruteforce(comp.as_set_function());
    } else {
        throw InvalidArgument("solver must be 'minnorm', 'pgd' or 'bruteforce'");
    }
    const auto x = recover_primal(comp, r.minimizer).x;
    py::dict d;
    d["x"] = x;
    d["objective"] = combined_objective(comp, x);
    d["support"] = r.minimizer.indices();
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exact model selection with combinatorial support penalties";
    m.attr("__version__") = kVersion;

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<InstanceSpec>(m, "Instance")
        .def_readonly("n", &InstanceSpec::n)
        .def_readonly("seed", &InstanceSpec::seed)
        .def_readonly("lam", &InstanceSpec::lambda)
        .def_property_readonly("Q", [](const InstanceSpec& s) { return s.fspec.q(); })
        .def_property_readonly("p", [](const InstanceSpec& s) { return s.fspec.p(); })
        .def_property_readonly("offset", [](const InstanceSpec& s) { return s.fspec.offset(); })
        .def("g", [](const InstanceSpec& s, const std::vector<std::size_t>& a) { return s.g(Subset::from_indices(s.n, a)); })
        .def("to_json", &instance_to_json);

    m.def("make_instance", &make_instance, py::arg("kind"), py::arg("n"), py::arg("seed") = 0,
          py::arg("lam") = 0.05, py::arg("penalty") = "range");
    m.def("solve", &solve, py::arg("instance"), py::arg("solver") = "minnorm", py::arg("tol") = 1e-4,
          py::arg("max_iter") = 100);
    m.def("penalty_value", [](const std::string& kind, std::size_t n, double lam, const std::vector<std::size_t>& a) {
        return make_penalty(parse_penalty(kind), n, lam)(Subset::from_indices(n, a));
    });
    m.def("lovasz_extension", [](const std::string& kind, double lam, const Eigen::VectorXd& u) {
        return lovasz_extension(make_penalty(parse_penalty(kind), static_cast<std::size_t>(u.size()), lam), u);
    });
    m.def("project_simplex", &project_simplex);
    m.def("run_experiment", [](const std::string& config_json) {
        auto sum = run_experiment(parse_config(config_json));
        py::dict d;
        d["files"] = sum.files;
        d["converged"] = sum.converged;
        std::vector<std::string> rows;
        for (const auto& r : sum.rows) rows.push_back(serialize_row(r));
        d["rows"] = rows;
        return d;
    });
}
