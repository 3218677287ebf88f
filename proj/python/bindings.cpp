#include "ompath/ompath.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace ompath;

namespace {

py::dict om_dict(const OmEvaluation& om) {
  return py::dict("total"_a = om.total, "drift_term"_a = om.drift_term, "divergence_term"_a = om.divergence_term,
                  "grid_size"_a = om.grid_size);
}

py::dict estimate_dict(const TubeEstimate& e) {
  return py::dict("probability"_a = e.probability, "hits"_a = e.hits, "samples"_a = e.samples,
                  "standard_error"_a = e.standard_error, "epsilon"_a = e.epsilon, "alpha"_a = e.alpha,
                  "low_statistics"_a = e.low_statistics);
}

py::dict ratio_dict(const RatioCheck& c) {
  return py::dict("log_prob_ratio"_a = c.log_prob_ratio, "om_prediction"_a = c.om_prediction,
                  "agreement"_a = c.agreement, "standard_error"_a = c.standard_error,
                  "inconclusive"_a = c.inconclusive, "om_first"_a = c.om_first, "om_second"_a = c.om_second,
                  "joint_hits"_a = c.joint_hits, "first"_a = estimate_dict(c.first),
                  "second"_a = estimate_dict(c.second));
}

DiscretePath as_path(const Eigen::MatrixXd& values) { return DiscretePath(values); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Onsager-Machlup most probable paths (C++ core)";

  auto base = py::register_exception<Error>(m, "OmpathError", PyExc_RuntimeError);
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<SingularMatrixError>(m, "SingularMatrixError", numerical.ptr());
  py::register_exception<SimulationDivergedError>(m, "SimulationDivergedError", numerical.ptr());
  py::register_exception<NoConvergenceError>(m, "NoConvergenceError", base.ptr());

  py::enum_<OmScheme>(m, "Scheme")
      .value("midpoint", OmScheme::kMidpoint)
      .value("trapezoid", OmScheme::kNodalTrapezoid);

  py::class_<SdeModel>(m, "Model")
      .def_readonly("name", &SdeModel::name)
      .def_readonly("dimension", &SdeModel::dimension)
      .def("drift", [](const SdeModel& s, double t, const Vector& x) { return eval_drift(s, t, x); }, "t"_a, "x"_a)
      .def("diffusion", [](const SdeModel& s, double t) { return eval_diffusion(s, t); }, "t"_a)
      .def("drift_jacobian", [](const SdeModel& s, double t, const Vector& x) { return eval_drift_jacobian(s, t, x); },
           "t"_a, "x"_a)
      .def("__repr__", [](const SdeModel& s) { return "<Model " + s.name + " n=" + std::to_string(s.dimension) + ">"; });

  m.def(
      "builtin_model",
      [](const std::string& name, const std::map<std::string, double>& params) {
        return builtin_model(name, ModelParams(params.begin(), params.end()));
      },
      "name"_a, "params"_a = std::map<std::string, double>{},
      "example1 | example2 (a, b) | linear_test (n, a, g_slope) | zero_drift (n, sigma)");

  m.def(
      "default_endpoints",
      [](const std::string& name) -> py::object {
        const auto ends = default_endpoints(name);
        if (!ends) return py::none();
        return py::make_tuple(ends->first, ends->second);
      },
      "name"_a);

  m.def(
      "om_functional",
      [](const SdeModel& model, const Eigen::MatrixXd& values, OmScheme scheme) {
        return om_dict(om_functional(model, as_path(values), scheme));
      },
      "model"_a, "values"_a, "scheme"_a = OmScheme::kMidpoint,
      "OM functional of the path with node values `values` (N+1 rows) on the uniform grid of [0, 1].");

  m.def(
      "om_path_gradient",
      [](const SdeModel& model, const Eigen::MatrixXd& values, OmScheme scheme) {
        return Eigen::MatrixXd(om_path_gradient(model, as_path(values), scheme));
      },
      "model"_a, "values"_a, "scheme"_a = OmScheme::kMidpoint);

  m.def(
      "euler_lagrange_residual",
      [](const SdeModel& model, const Eigen::MatrixXd& values) { return euler_lagrange_residual(model, as_path(values)); },
      "model"_a, "values"_a);

  m.def(
      "minimize_om",
      [](const SdeModel& model, const Vector& x_start, const Vector& x_end, std::size_t steps, std::size_t max_iters,
         double tolerance, const std::string& method) {
        OptimizerConfig cfg;
        cfg.steps = steps;
        cfg.max_iters = max_iters;
        cfg.gradient_tolerance = tolerance;
        cfg.method = parse_descent_method(method);
        OptimizeResult r;
        {
          py::gil_scoped_release release;
          r = minimize_om(model, x_start, x_end, cfg);
        }
        return py::dict("path"_a = Eigen::MatrixXd(r.path.values()), "om"_a = om_dict(r.om),
                        "iterations"_a = r.iterations, "converged"_a = r.converged,
                        "gradient_norm"_a = r.gradient_norm, "el_residual"_a = r.el_residual);
      },
      "model"_a, "x_start"_a, "x_end"_a, "steps"_a = 200, "max_iters"_a = 5000, "tolerance"_a = 1e-8,
      "method"_a = "newton");

  m.def("euler_lagrange_rhs_example1", &euler_lagrange_rhs_example1, "t"_a, "y"_a, "ydot"_a);

  m.def(
      "solve_el_bvp",
      [](const SecondOrderRhs& rhs, double y0, double y1, std::size_t steps) {
        return Eigen::MatrixXd(solve_el_bvp(rhs, y0, y1, steps).values());
      },
      "rhs"_a, "y0"_a, "y1"_a, "steps"_a,
      "Shooting solution of y'' = rhs(t, y, y') with y(0) = y0, y(1) = y1; returns N+1 x 1 values.");

  m.def(
      "simulate",
      [](const SdeModel& model, const Vector& x0, std::size_t steps, std::uint64_t seed, std::size_t samples) {
        std::vector<DiscretePath> paths;
        {
          py::gil_scoped_release release;
          paths = simulate_ensemble({model, x0, steps, seed, samples});
        }
        std::vector<Eigen::MatrixXd> out;
        out.reserve(paths.size());
        for (auto& p : paths) out.push_back(p.values());
        return out;
      },
      "model"_a, "x0"_a, "steps"_a = 1000, "seed"_a = 0, "samples"_a = 1,
      "Euler-Maruyama sample paths, one (N+1) x n array per sample.");

  m.def(
      "holder_norm",
      [](const Eigen::MatrixXd& values, double alpha) {
        const DiscretePath p(values);
        return holder_norm(p, HolderParams{alpha});
      },
      "values"_a, "alpha"_a);

  m.def(
      "tube_probability",
      [](const SdeModel& model, const Eigen::MatrixXd& reference, double epsilon, double alpha, std::size_t samples,
         std::uint64_t seed) {
        TubeQuery q{model, as_path(reference), epsilon, HolderParams{alpha}, samples, seed};
        TubeEstimate e;
        {
          py::gil_scoped_release release;
          e = tube_probability(q);
        }
        return estimate_dict(e);
      },
      "model"_a, "reference"_a, "epsilon"_a, "alpha"_a = 0.2, "samples"_a = 10000, "seed"_a = 0);

  m.def(
      "om_ratio_check",
      [](const SdeModel& model, const Eigen::MatrixXd& first, const Eigen::MatrixXd& second, double epsilon,
         double alpha, std::size_t samples, std::uint64_t seed, std::size_t tube_steps) {
        RatioOptions o;
        o.epsilon = epsilon;
        o.holder = {alpha};
        o.samples = samples;
        o.seed = seed;
        o.tube_steps = tube_steps;
        RatioCheck c;
        {
          py::gil_scoped_release release;
          c = om_ratio_check(model, as_path(first), as_path(second), o);
        }
        return ratio_dict(c);
      },
      "model"_a, "first"_a, "second"_a, "epsilon"_a = 0.35, "alpha"_a = 0.2, "samples"_a = 200000, "seed"_a = 0,
      "tube_steps"_a = 0);
}
