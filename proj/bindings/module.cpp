#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>

#include "lmc/diagnostics.hpp"
#include "lmc/models/banana.hpp"
#include "lmc/models/dataset.hpp"
#include "lmc/models/gmm.hpp"
#include "lmc/models/logistic.hpp"
#include "lmc/samplers.hpp"

namespace py = pybind11;
using namespace lmc;

namespace {

Method method_from_string(const std::string& name) {
  const auto m = parse_method(name);
  if (!m) throw std::invalid_argument("unknown method '" + name + "'");
  return *m;
}

SamplerSpec make_spec(const std::string& method, double epsilon, int steps, double fp_tol,
                      int fp_max, int fp_fixed, std::optional<Vector> mass,
                      bool volume_correction, std::uint64_t seed) {
  SamplerSpec spec;
  spec.method = method_from_string(method);
  spec.integ.epsilon = epsilon;
  spec.integ.n_steps = steps;
  spec.integ.fp_tol = fp_tol;
  spec.integ.fp_max = fp_max;
  spec.integ.fp_fixed_count = fp_fixed;
  spec.mass_diag = std::move(mass);
  spec.volume_correction = volume_correction;
  spec.seed = seed;
  return spec;
}

py::dict ess_dict(const EssReport& ess) {
  py::dict d;
  d["per_dimension"] = ess.per_dimension;
  d["min"] = ess.min;
  d["median"] = ess.median;
  d["max"] = ess.max;
  d["min_per_second"] = ess.min_per_second;
  return d;
}

py::dict summary_dict(const ChainSummary& out) {
  py::dict d;
  d["samples"] = out.samples;
  d["acceptance_rate"] = out.acceptance_rate;
  d["seconds_per_iteration"] = out.seconds_per_iteration;
  d["total_seconds"] = out.total_seconds;
  d["ess"] = ess_dict(out.ess);
  py::dict diag;
  diag["divergences"] = out.diagnostics.divergences;
  diag["metric_failures"] = out.diagnostics.metric_failures;
  diag["singular_updates"] = out.diagnostics.singular_updates;
  diag["fixed_point_failures"] = out.diagnostics.fixed_point_failures;
  diag["fixed_point_iters"] = out.diagnostics.fixed_point_iters;
  diag["jacobian_sign_flips"] = out.diagnostics.jacobian_sign_flips;
  d["diagnostics"] = diag;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "geometric MCMC samplers on position-dependent metrics";
  m.attr("__version__") = "0.1.0";

  py::class_<TargetModel>(m, "TargetModel")
      .def_property_readonly("dim", &TargetModel::dim)
      .def("log_density", &TargetModel::log_density, py::arg("theta"))
      .def("grad_log_density", &TargetModel::grad_log_density, py::arg("theta"))
      .def("metric", &TargetModel::metric, py::arg("theta"))
      .def("metric_deriv", &TargetModel::metric_deriv, py::arg("theta"))
      .def("initial_position", &TargetModel::initial_position);

  py::class_<LogisticRegressionModel, TargetModel>(m, "LogisticRegression")
      .def(py::init([](const Matrix& x, const Vector& y, double alpha, bool standardize) {
             Dataset data;
             data.name = "memory";
             data.provenance = "memory";
             data.x = x;
             data.y = y;
             for (Eigen::Index j = 0; j < x.cols(); ++j)
               data.columns.push_back("x" + std::to_string(j));
             return LogisticRegressionModel::from_dataset(data, alpha, standardize);
           }),
           py::arg("x"), py::arg("y"), py::arg("alpha") = 100.0,
           py::arg("standardize") = true,
           "Bayesian logistic regression with a Gaussian prior and Fisher metric; "
           "an intercept column is prepended.");

  py::class_<BananaModel, TargetModel>(m, "Banana")
      .def(py::init<Vector, double, double>(), py::arg("y"), py::arg("sigma_y") = 2.0,
           py::arg("sigma_theta") = 1.0,
           "Nonlinear regression y ~ N(theta0 + theta1^2, sigma_y^2) with a "
           "banana-shaped posterior.");

  py::class_<GaussianMixtureModel, TargetModel>(m, "GaussianMixture")
      .def(py::init([](const Vector& data, int components, double lam, double beta,
                       double ig_shape, std::optional<double> mean_loc,
                       std::optional<double> ig_scale) {
             GaussianMixtureModel::Prior prior;
             prior.lambda = lam;
             prior.beta = beta;
             prior.ig_shape = ig_shape;
             prior.mean_loc = mean_loc;
             prior.ig_scale = ig_scale;
             return GaussianMixtureModel(data, components, prior);
           }),
           py::arg("data"), py::arg("components"), py::arg("lam") = 1.0,
           py::arg("beta") = 1.0, py::arg("ig_shape") = 2.0,
           py::arg("mean_loc") = std::nullopt, py::arg("ig_scale") = std::nullopt,
           "Univariate mixture in unconstrained stick-breaking coordinates with an "
           "empirical Fisher metric.")
      .def_property_readonly("components", &GaussianMixtureModel::components)
      .def("log_likelihood", &GaussianMixtureModel::log_likelihood, py::arg("theta"))
      .def("constrain",
           [](const GaussianMixtureModel& self, const Vector& theta) {
             const auto p = self.constrain(theta);
             py::dict d;
             d["pi"] = p.pi;
             d["mu"] = p.mu;
             d["var"] = p.var;
             return d;
           },
           py::arg("theta"))
      .def("unconstrain",
           [](const GaussianMixtureModel& self, const Vector& pi, const Vector& mu,
              const Vector& var) {
             GaussianMixtureModel::Params p;
             p.pi = pi;
             p.mu = mu;
             p.var = var;
             return self.unconstrain(p);
           },
           py::arg("pi"), py::arg("mu"), py::arg("var"));

  m.def(
      "run_chain",
      [](const TargetModel& model, const std::string& method, int iterations, int burn_in,
         double epsilon, int steps, std::uint64_t seed, double fp_tol, int fp_max,
         int fp_fixed, std::optional<Vector> mass, bool volume_correction,
         std::optional<Vector> theta0) {
        const SamplerSpec spec = make_spec(method, epsilon, steps, fp_tol, fp_max, fp_fixed,
                                           std::move(mass), volume_correction, seed);
        ChainSummary out;
        {
          py::gil_scoped_release release;
          out = run_chain(model, spec, iterations, burn_in, std::move(theta0));
        }
        return summary_dict(out);
      },
      py::arg("model"), py::arg("method"), py::arg("iterations"), py::arg("burn_in"),
      py::arg("epsilon") = 0.1, py::arg("steps") = 10, py::arg("seed") = 1,
      py::arg("fp_tol") = 1e-10, py::arg("fp_max") = 100, py::arg("fp_fixed") = 0,
      py::arg("mass") = std::nullopt, py::arg("volume_correction") = true,
      py::arg("theta0") = std::nullopt,
      "Run one Metropolis-Hastings chain and summarize the kept draws.");

  m.def(
      "tune_step_size",
      [](const TargetModel& model, const std::string& method, double eps_lo, double eps_hi,
         double ap_low, double ap_high, int pilot_iters, int steps, std::uint64_t seed,
         double trajectory_length, double fp_tol) {
        SamplerSpec spec;
        spec.method = method_from_string(method);
        spec.integ.n_steps = steps;
        spec.integ.fp_tol = fp_tol;
        spec.seed = seed;
        py::gil_scoped_release release;
        return tune_step_size(model, spec, eps_lo, eps_hi, ap_low, ap_high, pilot_iters, 20,
                              trajectory_length);
      },
      py::arg("model"), py::arg("method"), py::arg("eps_lo") = 1e-3,
      py::arg("eps_hi") = 1.0, py::arg("ap_low") = 0.65, py::arg("ap_high") = 0.90,
      py::arg("pilot_iters") = 400, py::arg("steps") = 10, py::arg("seed") = 1,
      py::arg("trajectory_length") = 0.0, py::arg("fp_tol") = 1e-10,
      "Bisect log step size until the pilot acceptance rate lands in the window.");

  m.def("ess", &ess_initial_monotone, py::arg("series"),
        "Effective sample size by the initial-monotone-sequence rule.");
  m.def("autocovariance", &autocovariance, py::arg("series"), py::arg("max_lag"));
  m.def(
      "ess_report",
      [](const Matrix& samples, double total_seconds) {
        return ess_dict(summarize(samples, total_seconds));
      },
      py::arg("samples"), py::arg("total_seconds") = 0.0);

  m.def(
      "synth_logistic",
      [](int n, int d, std::uint64_t seed, double coef_var) {
        const Dataset data = synthesize_logreg(n, d, seed, coef_var);
        return py::make_tuple(data.x, data.y);
      },
      py::arg("n"), py::arg("d"), py::arg("seed") = 1, py::arg("coef_var") = 1.0,
      "Synthetic binary-response design matrix and labels.");
  m.def(
      "synth_banana",
      [](int n, std::uint64_t seed, double mu, double sigma_y) {
        return Vector(synthesize_banana(n, seed, mu, sigma_y).x.col(0));
      },
      py::arg("n"), py::arg("seed") = 1, py::arg("mu") = 1.0, py::arg("sigma_y") = 2.0);
  m.def(
      "synth_mixture",
      [](const std::string& family, int n, std::uint64_t seed) {
        return Matrix(synthesize_gmm(family, n, seed).x).col(0).eval();
      },
      py::arg("family"), py::arg("n"), py::arg("seed") = 1,
      "Draws from one of the named benchmark mixture densities.");
  m.def("mixture_components", &gmm_family_components, py::arg("family"));
}
