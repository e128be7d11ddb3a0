#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gmrk/continuation.hpp"
#include "gmrk/problems.hpp"
#include "gmrk/state_space.hpp"

namespace py = pybind11;
using namespace gmrk;

namespace {

GMRKConfig make_config(int order, double alpha, double u, double v, const std::string& tau,
                       double h) {
  GMRKConfig cfg;
  cfg.order = order;
  cfg.alpha = alpha;
  cfg.u = u;
  cfg.v = v;
  cfg.h = h;
  if (tau == "limit") {
    cfg.mode = TauMode::Limit;
  } else {
    cfg.mode = TauMode::FiniteTau;
    cfg.tau = std::stod(tau);
  }
  cfg.validate();
  return cfg;
}

IVProblem problem_from_callable(const std::function<double(double, double)>& f, double t0,
                                double x0, double tH) {
  return IVProblem::scalar(f, t0, x0, tH);
}

}  // namespace

PYBIND11_MODULE(_gmrk, m) {
  m.doc() = "Probabilistic Runge-Kutta solvers on integrated Wiener process priors";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConditioningError>(m, "ConditioningError", PyExc_ArithmeticError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<Tableau>(m, "Tableau")
      .def_readonly("s", &Tableau::s)
      .def_readonly("p", &Tableau::p)
      .def_readonly("c", &Tableau::c)
      .def_readonly("b", &Tableau::b)
      .def_readonly("W", &Tableau::W);

  m.def("tableau_euler", &tableau_euler);
  m.def("tableau_second_order", &tableau_second_order, py::arg("alpha"));
  m.def("tableau_third_order", &tableau_third_order, py::arg("u"), py::arg("v"));
  m.def(
      "check_order_conditions",
      [](const Tableau& t, int p) {
        auto rep = check_order_conditions(t, p);
        return rep.pass;
      },
      py::arg("tableau"), py::arg("p"));

  m.def(
      "rk_step",
      [](const Tableau& tab, const std::function<double(double, double)>& f, double t0, double x0,
         double h) {
        Rhs rhs = [&f](const Vec& x, double t) { return Vec::Constant(1, f(x[0], t)); };
        auto r = rk_step(tab, rhs, t0, Vec::Constant(1, x0), h);
        std::vector<double> ys;
        for (const auto& y : r.stage_derivs) ys.push_back(y[0]);
        return py::make_tuple(r.x1[0], ys);
      },
      py::arg("tableau"), py::arg("f"), py::arg("t0"), py::arg("x0"), py::arg("h"));

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("x1", &StepResult::x1)
      .def_readonly("weights_b", &StepResult::weights_b)
      .def_readonly("sigma2_hat", &StepResult::sigma2_hat)
      .def_readonly("variance_at_end", &StepResult::variance_at_end)
      .def("mean", &StepResult::mean, py::arg("t"))
      .def("unit_cov", &StepResult::unit_cov, py::arg("t"), py::arg("t2"))
      .def_property_readonly("nodes", [](const StepResult& s) {
        py::list out;
        for (const auto& n : s.nodes) out.append(py::make_tuple(n.c, n.xhat[0], n.y[0]));
        return out;
      });

  m.def(
      "step",
      [](const std::function<double(double, double)>& f, int order, double alpha, double u,
         double v, const std::string& tau, double h, double t0, double x0) {
        GMRKConfig cfg = make_config(order, alpha, u, v, tau, h);
        Rhs rhs = [&f](const Vec& x, double t) { return Vec::Constant(1, f(x[0], t)); };
        return step(cfg, rhs, t0, Vec::Constant(1, x0));
      },
      py::arg("f"), py::arg("order") = 2, py::arg("alpha") = 0.5, py::arg("u") = 0.5,
      py::arg("v") = 1.0, py::arg("tau") = "limit", py::arg("h") = 1.0, py::arg("t0") = 0.0,
      py::arg("x0") = 1.0);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("n_steps", &Trajectory::n_steps)
      .def_readonly("has_joint_posterior", &Trajectory::has_joint_posterior)
      .def("mean", [](const Trajectory& tr, double t) { return tr.mean(t)[0]; })
      .def("stddev", [](const Trajectory& tr, double t) { return tr.stddev(t)[0]; })
      .def(
          "grid",
          [](const Trajectory& tr, const std::string& problem, double lam, int points_per_step) {
            IVProblem prob = make_builtin_problem(problem, tr.t0 + tr.h * tr.n_steps, lam);
            py::list out;
            for (const auto& r : tr.grid_dump(prob, points_per_step)) {
              out.append(py::make_tuple(r.t, r.mean[0], r.std[0],
                                        r.has_truth ? r.truth[0] : std::nan("")));
            }
            return out;
          },
          py::arg("problem"), py::arg("lam") = -0.5, py::arg("points_per_step") = 10);

  m.def(
      "solve",
      [](const std::string& problem, const std::string& mode, int order, double alpha, double u,
         double v, const std::string& tau, double h, int steps, double lam) {
        GMRKConfig cfg = make_config(order, alpha, u, v, tau, h);
        IVProblem prob = make_builtin_problem(problem, steps * h, lam);
        if (mode == "naive") return run_naive(cfg, prob);
        if (mode == "smoothing") return run_smoothing(cfg, prob);
        if (mode == "continuation") return run_continuation(cfg, prob);
        throw DomainError("mode must be naive, smoothing or continuation");
      },
      py::arg("problem") = "linear", py::arg("mode") = "continuation", py::arg("order") = 2,
      py::arg("alpha") = 0.5, py::arg("u") = 0.5, py::arg("v") = 1.0, py::arg("tau") = "limit",
      py::arg("h") = 1.0, py::arg("steps") = 10, py::arg("lam") = -0.5);

  py::class_<KernelModel>(m, "KernelModel")
      .def_static("integrated_wiener", &KernelModel::integrated_wiener, py::arg("q"),
                  py::arg("sigma2") = 1.0, py::arg("tau") = 0.0)
      .def_static("squared_exponential", &KernelModel::squared_exponential, py::arg("sigma2"),
                  py::arg("lengthscale"));

  m.def("kernel", [](const KernelModel& mo, double t, double t2) { return k(mo, t, t2); });
  m.def("kernel_kd", [](const KernelModel& mo, double t, double t2) { return kd(mo, t, t2); });
  m.def("kernel_dk", [](const KernelModel& mo, double t, double t2) { return dk(mo, t, t2); });
  m.def("kernel_dkd", [](const KernelModel& mo, double t, double t2) { return dkd(mo, t, t2); });

  m.def("limit_posterior_mean", &limit_posterior_mean, py::arg("p"), py::arg("c2"), py::arg("c3"),
        py::arg("h"), py::arg("x0"), py::arg("y"), py::arg("s"));
  m.def("limit_posterior_cov", &limit_posterior_cov, py::arg("p"), py::arg("c2"), py::arg("c3"),
        py::arg("h"), py::arg("s"), py::arg("s2"), py::arg("sigma2") = 1.0);
  m.def("third_order_epsilon", &third_order_epsilon, py::arg("u"), py::arg("v"));

  m.def(
      "filter",
      [](int q, double sigma2, double t_value, double x_value, const std::vector<double>& dts,
         const std::vector<double>& dys, const std::vector<double>& grid) {
        auto pts = filter(make_integrator_ssm(q, sigma2), t_value, x_value, dts, dys, grid);
        py::list out;
        for (const auto& p : pts) out.append(py::make_tuple(p.t, p.mean, p.var));
        return out;
      },
      py::arg("q"), py::arg("sigma2"), py::arg("t_value"), py::arg("x_value"),
      py::arg("deriv_times"), py::arg("deriv_values"), py::arg("grid"));

  m.def("discretize", [](int q, double sigma2, double h) {
    auto d = discretize(make_integrator_ssm(q, sigma2), h);
    return py::make_tuple(d.A, d.Q);
  });
}
