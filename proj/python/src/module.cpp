#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msopt/bounds.hpp"
#include "msopt/constraints.hpp"
#include "msopt/error.hpp"
#include "msopt/grid.hpp"
#include "msopt/multiscale.hpp"
#include "msopt/problems.hpp"
#include "msopt/tucker.hpp"

namespace py = pybind11;
using namespace msopt;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseTensor to_tensor(const Array& a) {
  std::vector<Index> dims(a.shape(), a.shape() + a.ndim());
  return DenseTensor(dims, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const DenseTensor& t) {
  std::vector<py::ssize_t> shape(t.dims().begin(), t.dims().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

py::dict result_dict(const Vector& x, const SolveTrace& trace, int S) {
  std::vector<std::int64_t> steps;
  for (int s = 1; s <= S; ++s) steps.push_back(trace.steps_at_scale(s));
  py::dict d;
  d["x"] = x;
  d["steps_by_scale"] = steps;
  return d;
}

py::dict tucker_dict(const tucker::Result& r) {
  py::dict d;
  d["A"] = r.factors.A;
  d["B"] = to_array(r.factors.B);
  d["iterations"] = r.iterations;
  d["stop_reason"] = r.stop_reason;
  d["rel_error"] = r.final_rel_error;
  d["mean_rel_error"] = r.final_mean_rel_error;
  d["objective"] = r.final_objective;
  d["max_violation"] = r.max_violation;
  return d;
}

tucker::Options tucker_options(std::optional<double> tol, std::int64_t max_iter, std::uint64_t seed) {
  tucker::Options o;
  o.mean_rel_error_tol = tol;
  o.max_iterations = max_iter;
  o.seed = seed;
  return o;
}

IterationPlan make_plan(const std::string& kind, std::int64_t K, int S) {
  if (kind == "greedy") return greedy_plan(K, GreedyVariant::kOnePerCoarse, S);
  if (kind == "greedy-uniform") return greedy_plan(K, GreedyVariant::kUniform, S);
  if (kind == "lazy") return lazy_plan(K, S);
  if (kind == "uniform") return IterationPlan::uniform(S, K);
  throw InvalidInput("unknown plan kind: " + kind);
}

}  // namespace

PYBIND11_MODULE(_msopt, m) {
  m.doc() = "Multiscale projected gradient descent";

  // Translators run newest first, so the base class goes in before its children.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<OutOfDomain>(m, "OutOfDomain", PyExc_ValueError);

  m.def("dyadic_points", &dyadic_points, py::arg("coarsest_scale"));
  m.def("coarsen", &coarsen, py::arg("x"));
  m.def("interpolate", &interpolate, py::arg("x"));
  m.def("free_variables", &free_variables, py::arg("coarse"));
  m.def("midpoint_mask", &midpoint_mask, py::arg("fine_length"));
  m.def("vector_lipschitz", &vector_lipschitz, py::arg("x"));

  m.def("project_nonneg", &project_nonneg, py::arg("x"));
  m.def("project_scaled_simplex", &project_scaled_simplex, py::arg("x"), py::arg("c") = 1.0);
  m.def("project_row_simplex", &project_row_simplex, py::arg("A"));
  m.def("project_affine", &project_affine, py::arg("x"), py::arg("A"), py::arg("b"));

  m.def("exact_interp_bound", &bounds::exact_interp_bound, py::arg("L_f"), py::arg("I"),
        py::arg("width"));
  m.def("piecewise_distance_bound", &bounds::piecewise_distance_bound, py::arg("dt"),
        py::arg("diff_norm"));
  m.def("expected_pgd_bound", &bounds::expected_pgd_bound, py::arg("q"), py::arg("K"),
        py::arg("S"));
  m.def("pgd_iterations_needed", &bounds::pgd_iterations_needed, py::arg("epsilon"),
        py::arg("q"), py::arg("S"));
  m.def("legendre_value", &legendre_value, py::arg("m"), py::arg("t"));

  py::class_<LegendreProblemSpec>(m, "LegendreSpec")
      .def(py::init<>())
      .def_readwrite("M", &LegendreProblemSpec::M)
      .def_readwrite("first_degree", &LegendreProblemSpec::first_degree)
      .def_readwrite("S", &LegendreProblemSpec::S)
      .def_readwrite("lam", &LegendreProblemSpec::lambda)
      .def_readwrite("noise_level", &LegendreProblemSpec::noise_level)
      .def_readwrite("seed", &LegendreProblemSpec::seed);

  m.def("generate_measurements", [](const LegendreProblemSpec& spec) {
    MeasurementData d = generate_measurements(spec);
    py::dict out;
    out["y"] = d.y;
    out["clean"] = d.clean;
    out["x_true"] = d.x_true;
    out["A"] = d.operator_fine;
    return out;
  }, py::arg("spec"));

  py::class_<ProblemFamily>(m, "Family")
      .def_property_readonly("scales", [](const ProblemFamily& f) { return f.hierarchy.coarsest_scale(); })
      .def("points", [](const ProblemFamily& f, int s) { return f.hierarchy.points(s); })
      .def("objective", [](const ProblemFamily& f, int s, const Vector& x) {
        return f.make_problem(s).objective(x);
      })
      .def("gradient", [](const ProblemFamily& f, int s, const Vector& x) {
        return f.make_problem(s).gradient(x);
      })
      .def("project", [](const ProblemFamily& f, int s, const Vector& x) {
        return f.make_problem(s).project(x);
      })
      .def("pgd", [](const ProblemFamily& f, int s, const Vector& x0, std::int64_t iterations) {
        ProblemAtScale p = f.make_problem(s);
        RunResult r = run(p, x0, StoppingRule::iterations(iterations), pgd_rule(p));
        return r.x;
      }, py::arg("scale"), py::arg("x0"), py::arg("iterations"))
      .def("solve", [](const ProblemFamily& f, const Vector& init, const std::string& plan,
                       std::int64_t K) {
        int S = f.hierarchy.coarsest_scale();
        IterationPlan p = make_plan(plan, K, S);
        MultiscaleResult r = plan == "lazy" ? lazy_solve(f, p, init) : greedy_solve(f, p, init);
        return result_dict(r.x, r.trace, S);
      }, py::arg("init"), py::arg("plan") = "greedy", py::arg("K") = 100,
         "Coarse-to-fine run from an iterate at the coarsest scale.");

  m.def("legendre_family", [](const LegendreProblemSpec& spec) { return make_family(spec); },
        py::arg("spec"));

  m.def("gaussian_vector", [](Index n, std::uint64_t seed) { return gaussian_vector(n, seed); },
        py::arg("n"), py::arg("seed"));

  auto t = m.def_submodule("tucker", "Constrained Tucker-1 factorization");
  t.def("factorize", [](const Array& Y, Index R, std::optional<double> tol, std::int64_t max_iter,
                        std::uint64_t seed) {
    return tucker_dict(tucker::bcd_factorize(to_tensor(Y), R, tucker_options(tol, max_iter, seed)));
  }, py::arg("Y"), py::arg("rank"), py::arg("tol") = py::none(), py::arg("max_iter") = 500,
     py::arg("seed") = 0);
  t.def("msfactorize", [](const Array& Y, Index R, const std::set<Index>& dims,
                          std::optional<double> tol, std::int64_t max_iter, std::uint64_t seed) {
    return tucker_dict(tucker::multiscale_factorize(to_tensor(Y), R, dims,
                                                    tucker_options(tol, max_iter, seed)));
  }, py::arg("Y"), py::arg("rank"), py::arg("continuous_dims"), py::arg("tol") = py::none(),
     py::arg("max_iter") = 500, py::arg("seed") = 0);
  t.def("synth_mixtures", [](Index points) {
    tucker::MixtureSpec spec;
    spec.points = points;
    tucker::Mixture mix = tucker::synth_mixtures(spec);
    return py::make_tuple(to_array(mix.Y), mix.A_true);
  }, py::arg("points") = 65);
  t.def("aligned_max_error", &tucker::aligned_max_error, py::arg("A"), py::arg("A_true"));
  t.def("read_tensor", [](const std::string& p) { return to_array(tucker::read_tensor(p)); });
  t.def("write_tensor", [](const std::string& p, const Array& a) {
    tucker::write_tensor(p, to_tensor(a));
  });
}
