#include <memory>

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "elsolve/element_operator.hpp"
#include "elsolve/elements.hpp"
#include "elsolve/experiment.hpp"
#include "elsolve/mesh.hpp"
#include "elsolve/oracle/reference_oracle.hpp"
#include "elsolve/solvers.hpp"
#include "elsolve/spectrum.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> from_array(const Array& a) {
    if (a.ndim() != 1) {
        throw py::value_error("expected a 1-D array");
    }
    return {a.data(), a.data() + a.size()};
}

// Mesh, element batch, Dirichlet data and operator bundled with stable
// addresses; the operator keeps a pointer into the batch.
class Problem {
public:
    Problem(const elsolve::Mesh& mesh, double nu, const elsolve::SourceFunction& f, double boundary_value,
            int threads, bool deterministic)
        : mesh_(mesh),
          batch_(std::make_unique<elsolve::ElementBatch>(elsolve::build_element_batch(mesh, nu, f))),
          dirichlet_(elsolve::dirichlet_on_boundary(mesh, [boundary_value](double, double) { return boundary_value; })),
          op_(std::make_unique<elsolve::ElementOperator>(*batch_, elsolve::ExecutionPolicy{threads, deterministic})) {}

    const elsolve::Mesh& mesh() const { return mesh_; }
    const elsolve::ElementOperator& op() const { return *op_; }
    const elsolve::DirichletData& dirichlet() const { return dirichlet_; }
    const elsolve::ElementBatch& batch() const { return *batch_; }

    elsolve::SolverOptions options(std::size_t iters, std::optional<double> tol) const {
        elsolve::SolverOptions o;
        o.iterations = iters;
        o.tolerance = tol;
        return o;
    }

private:
    elsolve::Mesh mesh_;
    std::unique_ptr<elsolve::ElementBatch> batch_;
    elsolve::DirichletData dirichlet_;
    std::unique_ptr<elsolve::ElementOperator> op_;
};

py::tuple result_tuple(elsolve::SolveResult r) {
    return py::make_tuple(to_array(r.x), std::move(r.history));
}

}  // namespace

PYBIND11_MODULE(_elsolve, m) {
    m.doc() = "Matrix-free P1 finite element solvers (Richardson, two- and three-level Chebyshev)";

    py::register_exception<elsolve::Error>(m, "Error", PyExc_RuntimeError);

    py::class_<elsolve::Mesh>(m, "Mesh")
        .def_readonly("level", &elsolve::Mesh::level)
        .def_property_readonly("n_nodes", &elsolve::Mesh::n_nodes)
        .def_property_readonly("n_elements", &elsolve::Mesh::n_elements)
        .def_readonly("boundary_nodes", &elsolve::Mesh::boundary_nodes)
        .def_property_readonly("nodes",
                               [](const elsolve::Mesh& mesh) {
                                   py::array_t<double> out({static_cast<py::ssize_t>(mesh.n_nodes()), py::ssize_t{2}});
                                   auto v = out.mutable_unchecked<2>();
                                   for (std::size_t k = 0; k < mesh.n_nodes(); ++k) {
                                       v(k, 0) = mesh.nodes[k].x;
                                       v(k, 1) = mesh.nodes[k].y;
                                   }
                                   return out;
                               })
        .def_property_readonly("elements", [](const elsolve::Mesh& mesh) {
            py::array_t<std::int64_t> out({static_cast<py::ssize_t>(mesh.n_elements()), py::ssize_t{3}});
            auto v = out.mutable_unchecked<2>();
            for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
                for (std::size_t j = 0; j < 3; ++j) {
                    v(e, j) = static_cast<std::int64_t>(mesh.elements[e][j]);
                }
            }
            return out;
        });

    m.def("build_unit_square_mesh", &elsolve::build_unit_square_mesh, py::arg("level"));
    m.def("uniform_refine", &elsolve::uniform_refine, py::arg("mesh"));

    py::class_<elsolve::SpectralBounds>(m, "SpectralBounds")
        .def(py::init([](double l1, double l2) { return elsolve::SpectralBounds{l1, l2}; }), py::arg("lambda1"),
             py::arg("lambda2"))
        .def_readwrite("lambda1", &elsolve::SpectralBounds::lambda1)
        .def_readwrite("lambda2", &elsolve::SpectralBounds::lambda2)
        .def("__repr__", [](const elsolve::SpectralBounds& b) {
            return "SpectralBounds(" + std::to_string(b.lambda1) + ", " + std::to_string(b.lambda2) + ")";
        });

    m.def("model_eigen_bounds", &elsolve::model_eigen_bounds, py::arg("n"));
    m.def("model_eigenvalues_all", [](std::size_t n) { return to_array(elsolve::model_eigenvalues_all(n)); },
          py::arg("n"));
    m.def("chebyshev_roots",
          [](const elsolve::SpectralBounds& b, int n) { return to_array(elsolve::chebyshev_roots(b, n).alphas); },
          py::arg("bounds"), py::arg("n"));
    m.def("chebyshev_scaling_factor", &elsolve::chebyshev_scaling_factor, py::arg("bounds"), py::arg("k"));

    py::class_<elsolve::ConvergenceHistory>(m, "ConvergenceHistory")
        .def_property_readonly("residual_norms",
                               [](const elsolve::ConvergenceHistory& h) { return to_array(h.residual_norms); })
        .def_property_readonly("error_norms",
                               [](const elsolve::ConvergenceHistory& h) { return to_array(h.error_norms); })
        .def_readonly("iterations", &elsolve::ConvergenceHistory::iterations)
        .def_readonly("diverged", &elsolve::ConvergenceHistory::diverged)
        .def_readonly("wall_seconds", &elsolve::ConvergenceHistory::wall_seconds);

    py::class_<Problem>(m, "Problem")
        .def(py::init<const elsolve::Mesh&, double, const elsolve::SourceFunction&, double, int, bool>(),
             py::arg("mesh"), py::arg("nu") = 0.0,
             py::arg("f") = elsolve::SourceFunction([](double, double) { return 1.0; }),
             py::arg("boundary_value") = 1.0, py::arg("threads") = 1, py::arg("deterministic") = true)
        .def_property_readonly("mesh", &Problem::mesh)
        .def_property_readonly("dirichlet_nodes", [](const Problem& p) { return p.dirichlet().nodes; })
        .def("rhs", [](const Problem& p) { return to_array(p.op().assemble_rhs()); })
        .def("initial_guess",
             [](const Problem& p) { return to_array(elsolve::apply_initial_guess(p.mesh(), p.dirichlet())); })
        .def("residual", [](const Problem& p, const Array& x) { return to_array(p.op().residual(from_array(x))); },
             py::arg("x"))
        .def("apply", [](const Problem& p, const Array& x) { return to_array(p.op().apply(from_array(x))); },
             py::arg("x"))
        .def(
            "richardson",
            [](const Problem& p, const elsolve::SpectralBounds& b, std::size_t iters, std::optional<double> tol) {
                const auto x0 = elsolve::apply_initial_guess(p.mesh(), p.dirichlet());
                return result_tuple(elsolve::richardson(p.op(), p.dirichlet(), x0, b, p.options(iters, tol)));
            },
            py::arg("bounds"), py::arg("iters"), py::arg("tol") = py::none())
        .def(
            "chebyshev2",
            [](const Problem& p, const elsolve::SpectralBounds& b, int n, std::size_t iters,
               std::optional<double> tol) {
                const auto x0 = elsolve::apply_initial_guess(p.mesh(), p.dirichlet());
                return result_tuple(elsolve::chebyshev2(p.op(), p.dirichlet(), x0, b, n, p.options(iters, tol)));
            },
            py::arg("bounds"), py::arg("n"), py::arg("iters"), py::arg("tol") = py::none())
        .def(
            "chebyshev3",
            [](const Problem& p, const elsolve::SpectralBounds& b, std::size_t iters, std::optional<double> tol) {
                const auto x0 = elsolve::apply_initial_guess(p.mesh(), p.dirichlet());
                return result_tuple(elsolve::chebyshev3(p.op(), p.dirichlet(), x0, b, p.options(iters, tol)));
            },
            py::arg("bounds"), py::arg("iters"), py::arg("tol") = py::none())
        .def("power_iteration_lambda_max",
             [](const Problem& p, std::uint64_t seed) {
                 elsolve::PowerIterationOptions o;
                 o.seed = seed;
                 return elsolve::power_iteration_lambda_max(p.op(), p.dirichlet(), o);
             },
             py::arg("seed") = 0)
        .def("reference_solution", [](const Problem& p) {
            const auto& batch = p.batch();
            const auto a = elsolve::oracle::assemble_sparse(batch.system, batch.index.scatter, batch.n_nodes);
            const auto b = elsolve::oracle::assemble_vector(batch.loads, batch.index.scatter, batch.n_nodes);
            return to_array(elsolve::oracle::solve_reference(a, b, p.dirichlet()));
        });

    m.def(
        "run_experiment",
        [](int level, double nu, std::size_t iters, const std::string& solver, int cycle_n, bool compare_direct,
           int threads, std::optional<std::filesystem::path> out_dir) {
            elsolve::ExperimentConfig config;
            config.level = level;
            config.nu = nu;
            config.iterations = iters;
            config.solvers = elsolve::parse_solver_selection(solver);
            config.cycle_length = cycle_n;
            config.compare_direct = compare_direct;
            config.threads = threads;
            config.out_dir = std::move(out_dir);
            const auto report = elsolve::run_experiment(config);
            py::dict out;
            out["lambda1"] = report.bounds.lambda1;
            out["lambda2"] = report.bounds.lambda2;
            out["n_nodes"] = report.mesh.n_nodes();
            py::dict runs;
            for (const auto& run : report.runs) {
                py::dict r;
                r["x"] = to_array(run.x);
                r["history"] = run.history;
                r["error_ratio"] = run.error_ratio ? py::cast(*run.error_ratio) : py::none();
                runs[py::str(elsolve::to_string(run.kind))] = r;
            }
            out["runs"] = runs;
            return out;
        },
        py::arg("level") = 5, py::arg("nu") = 0.0, py::arg("iters") = 124, py::arg("solver") = "all",
        py::arg("cycle_n") = 32, py::arg("compare_direct") = false, py::arg("threads") = 1,
        py::arg("out_dir") = py::none());
}
