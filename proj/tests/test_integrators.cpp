#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lmc/integrators.hpp"
#include "lmc/models/banana.hpp"
#include "lmc/rng.hpp"
#include "support/finite_diff.hpp"
#include "support/test_models.hpp"

using namespace lmc;

namespace {

IntegratorConfig tight_config(double eps, int steps) {
  IntegratorConfig cfg;
  cfg.epsilon = eps;
  cfg.n_steps = steps;
  cfg.fp_tol = 1e-14;
  cfg.fp_max = 200;
  return cfg;
}

PhasePoint random_state(const TargetModel& model, Rng& rng, AuxKind kind, double spread = 0.6) {
  const Vector theta = spread * rng.normal_vector(model.dim());
  auto bundle = build_metric_bundle(model, theta);
  REQUIRE(bundle.has_value());
  const Vector z = rng.normal_vector(model.dim());
  Vector aux;
  if (kind == AuxKind::Momentum) {
    aux = bundle->chol * z;
  } else {
    aux = z;
    bundle->chol.triangularView<Eigen::Lower>().transpose().solveInPlace(aux);
  }
  return PhasePoint{theta, aux, kind};
}

testing::StepMap step_map(const TargetModel& model, Integrator which,
                          const IntegratorConfig& cfg) {
  return [&model, which, cfg](const PhasePoint& p) -> PhasePoint {
    switch (which) {
      case Integrator::GeneralizedLeapfrog: {
        auto r = generalized_leapfrog_step(model, p, cfg);
        REQUIRE(r.status == StepStatus::Ok);
        return r.state;
      }
      case Integrator::Rmlmc: {
        auto r = rmlmc_step(model, p, cfg);
        REQUIRE(r.status == StepStatus::Ok);
        return r.state;
      }
      case Integrator::Ermlmc: {
        auto r = ermlmc_step(model, p, cfg.epsilon);
        REQUIRE(r.status == StepStatus::Ok);
        return r.state;
      }
      default: {
        auto r = leapfrog_step(model, p, cfg.epsilon, Vector::Ones(model.dim()));
        return r.state;
      }
    }
  };
}

double fd_logabsdet(const testing::StepMap& map, const PhasePoint& at, double h = 1e-5) {
  const Matrix jac = testing::fd_step_jacobian(map, at, h);
  const double det = jac.determinant();
  REQUIRE(det != 0.0);
  return std::log(std::abs(det));
}

}  // namespace

TEST_CASE("leapfrog: harmonic oscillator energy stays bounded, reversal exact") {
  testing::GaussianModel model(2);
  const Vector inv_mass = Vector::Ones(2);
  PhasePoint state{Vector{{1.0, -0.5}}, Vector{{0.3, 0.8}}, AuxKind::Momentum};

  IntegratorConfig cfg = tight_config(0.05, 200);
  const TrajectoryResult fwd = integrate(model, state, cfg, Integrator::Leapfrog, &inv_mass);
  CHECK_FALSE(fwd.diverged);
  CHECK(std::abs(fwd.end_energy - fwd.start_energy) < 1e-3);  // O(eps^2) drift bound

  PhasePoint back = fwd.end;
  back.aux = -back.aux;
  const TrajectoryResult rev = integrate(model, back, cfg, Integrator::Leapfrog, &inv_mass);
  CHECK((rev.end.theta - state.theta).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rev.end.aux + state.aux).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity metric: every stepper degenerates to leapfrog") {
  testing::GaussianModel model(3);
  Rng rng(33);
  const IntegratorConfig cfg = tight_config(0.1, 10);
  const Vector inv_mass = Vector::Ones(3);

  for (int trial = 0; trial < 10; ++trial) {
    const PhasePoint p0 = random_state(model, rng, AuxKind::Momentum, 1.0);
    // same start, velocity form: v = p when G = I
    const PhasePoint v0{p0.theta, p0.aux, AuxKind::Velocity};

    PhasePoint lf = p0, glf = p0, rml = v0, erml = v0;
    for (int s = 0; s < cfg.n_steps; ++s) {
      lf = leapfrog_step(model, lf, cfg.epsilon, inv_mass).state;

      auto g = generalized_leapfrog_step(model, glf, cfg);
      REQUIRE(g.status == StepStatus::Ok);
      glf = g.state;

      auto r = rmlmc_step(model, rml, cfg);
      REQUIRE(r.status == StepStatus::Ok);
      CHECK(r.log_jacobian == 0.0);
      rml = r.state;

      auto e = ermlmc_step(model, erml, cfg.epsilon);
      REQUIRE(e.status == StepStatus::Ok);
      CHECK(e.log_jacobian == 0.0);
      erml = e.state;

      CHECK((glf.theta - lf.theta).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((glf.aux - lf.aux).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((rml.theta - lf.theta).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((rml.aux - lf.aux).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((erml.theta - lf.theta).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((erml.aux - lf.aux).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("reversibility: forward, negate, forward returns to the start") {
  Rng data_rng(3);
  BananaModel banana(data_rng.normal_vector(60).array() + 1.0, 2.0, 1.0);
  testing::RandomSpdModel spd;
  const std::vector<const TargetModel*> models{&banana, &spd};

  IntegratorConfig cfg = tight_config(0.05, 8);
  cfg.fp_tol = 1e-12;
  IntegratorConfig one = cfg;
  one.n_steps = 1;
  // single-step round trips meet 10*fp_tol; fixed-point residuals accumulate
  // roughly linearly over the 2L solves of a full round trip
  const double multi_tol = 10 * cfg.fp_tol * cfg.n_steps;

  Rng rng(77);
  for (const TargetModel* model : models) {
    for (int trial = 0; trial < 25; ++trial) {
      // momentum form
      {
        const PhasePoint start = random_state(*model, rng, AuxKind::Momentum);
        const TrajectoryResult fwd =
            integrate(*model, start, cfg, Integrator::GeneralizedLeapfrog);
        REQUIRE(fwd.status == StepStatus::Ok);
        PhasePoint back = fwd.end;
        back.aux = -back.aux;
        const TrajectoryResult rev =
            integrate(*model, back, cfg, Integrator::GeneralizedLeapfrog);
        REQUIRE(rev.status == StepStatus::Ok);
        CHECK((rev.end.theta - start.theta).cwiseAbs().maxCoeff() < multi_tol);
        CHECK((rev.end.aux + start.aux).cwiseAbs().maxCoeff() < multi_tol);

        const StepResult f1 = generalized_leapfrog_step(*model, start, one);
        REQUIRE(f1.status == StepStatus::Ok);
        const StepResult r1 = generalized_leapfrog_step(
            *model, PhasePoint{f1.state.theta, -f1.state.aux, AuxKind::Momentum}, one);
        REQUIRE(r1.status == StepStatus::Ok);
        CHECK((r1.state.theta - start.theta).cwiseAbs().maxCoeff() < 10 * cfg.fp_tol);
        CHECK((r1.state.aux + start.aux).cwiseAbs().maxCoeff() < 10 * cfg.fp_tol);
      }
      // velocity form, semi-explicit
      {
        const PhasePoint start = random_state(*model, rng, AuxKind::Velocity);
        const TrajectoryResult fwd = integrate(*model, start, cfg, Integrator::Rmlmc);
        REQUIRE(fwd.status == StepStatus::Ok);
        PhasePoint back = fwd.end;
        back.aux = -back.aux;
        const TrajectoryResult rev = integrate(*model, back, cfg, Integrator::Rmlmc);
        REQUIRE(rev.status == StepStatus::Ok);
        CHECK((rev.end.theta - start.theta).cwiseAbs().maxCoeff() < multi_tol);
        CHECK((rev.end.aux + start.aux).cwiseAbs().maxCoeff() < multi_tol);
        // the volume correction must flip sign on the reversed path
        CHECK(std::abs(rev.log_jacobian + fwd.log_jacobian) < 1e-9);

        const StepResult f1 = rmlmc_step(*model, start, one);
        REQUIRE(f1.status == StepStatus::Ok);
        const StepResult r1 = rmlmc_step(
            *model, PhasePoint{f1.state.theta, -f1.state.aux, AuxKind::Velocity}, one);
        REQUIRE(r1.status == StepStatus::Ok);
        CHECK((r1.state.theta - start.theta).cwiseAbs().maxCoeff() < 10 * cfg.fp_tol);
        CHECK((r1.state.aux + start.aux).cwiseAbs().maxCoeff() < 10 * cfg.fp_tol);
        CHECK(std::abs(r1.log_jacobian + f1.log_jacobian) < 1e-10);
      }
      // velocity form, fully explicit: reversible up to linear-solve roundoff
      {
        const PhasePoint start = random_state(*model, rng, AuxKind::Velocity);
        const TrajectoryResult fwd = integrate(*model, start, cfg, Integrator::Ermlmc);
        REQUIRE(fwd.status == StepStatus::Ok);
        PhasePoint back = fwd.end;
        back.aux = -back.aux;
        const TrajectoryResult rev = integrate(*model, back, cfg, Integrator::Ermlmc);
        REQUIRE(rev.status == StepStatus::Ok);
        CHECK((rev.end.theta - start.theta).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((rev.end.aux + start.aux).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(std::abs(rev.log_jacobian + fwd.log_jacobian) < 1e-9);
      }
    }
  }
}

TEST_CASE("volume corrections match finite-difference jacobians") {
  Rng data_rng(13);
  BananaModel banana(data_rng.normal_vector(40).array() + 1.0, 2.0, 1.0);
  testing::RandomSpdModel spd;
  const std::vector<const TargetModel*> models{&banana, &spd};

  Rng rng(55);
  for (const TargetModel* model : models) {
    for (double eps : {0.01, 0.05}) {
      IntegratorConfig cfg = tight_config(eps, 1);
      for (int trial = 0; trial < 10; ++trial) {
        const PhasePoint at = random_state(*model, rng, AuxKind::Velocity);

        auto rml = rmlmc_step(*model, at, cfg);
        REQUIRE(rml.status == StepStatus::Ok);
        double fd = fd_logabsdet(step_map(*model, Integrator::Rmlmc, cfg), at);
        CHECK(std::abs(std::exp(rml.log_jacobian) - std::exp(fd)) <=
              1e-4 * std::exp(fd));

        auto erml = ermlmc_step(*model, at, eps);
        REQUIRE(erml.status == StepStatus::Ok);
        fd = fd_logabsdet(step_map(*model, Integrator::Ermlmc, cfg), at);
        CHECK(std::abs(std::exp(erml.log_jacobian) - std::exp(fd)) <=
              1e-4 * std::exp(fd));

        // the momentum-form stepper preserves phase-space volume
        const PhasePoint pm = random_state(*model, rng, AuxKind::Momentum);
        fd = fd_logabsdet(step_map(*model, Integrator::GeneralizedLeapfrog, cfg), pm);
        CHECK(std::abs(std::exp(fd) - 1.0) <= 1e-5);
      }
    }
  }
}

TEST_CASE("energy forms agree through the momentum-velocity map") {
  testing::RandomSpdModel model;
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector theta = 0.7 * rng.normal_vector(3);
    const Vector v = rng.normal_vector(3);
    auto cache = make_geo_cache(model, theta, GeoNeeds::MetricOnly);
    REQUIRE(cache.has_value());
    const Vector p = cache->bundle.g * v;
    CHECK(energy_from(*cache, v) ==
          doctest::Approx(hamiltonian_from(*cache, p) - cache->bundle.log_det).epsilon(1e-10));
  }
}

TEST_CASE("momentum and velocity forms agree to second order in epsilon") {
  Rng data_rng(23);
  BananaModel model(data_rng.normal_vector(40).array() + 1.0, 2.0, 1.0);
  Rng rng(15);

  const PhasePoint pm = random_state(model, rng, AuxKind::Momentum);
  auto cache0 = make_geo_cache(model, pm.theta, GeoNeeds::MetricOnly);
  REQUIRE(cache0.has_value());
  const Vector v0 = cache0->bundle.solve(pm.aux);

  auto gap = [&](double eps) {
    IntegratorConfig cfg = tight_config(eps, 1);
    auto a = generalized_leapfrog_step(model, pm, cfg);
    auto b = rmlmc_step(model, PhasePoint{pm.theta, v0, AuxKind::Velocity}, cfg);
    REQUIRE(a.status == StepStatus::Ok);
    REQUIRE(b.status == StepStatus::Ok);
    // compare positions and map the momentum end state to a velocity
    const Vector va = a.end_cache->bundle.solve(a.state.aux);
    return std::max((a.state.theta - b.state.theta).cwiseAbs().maxCoeff(),
                    (va - b.state.aux).cwiseAbs().maxCoeff());
  };

  // second-order agreement: gap ~ C eps^2, checked with headroom
  const double c = gap(0.2) / (0.2 * 0.2);
  CHECK(gap(0.1) <= 2.0 * c * 0.1 * 0.1);
  CHECK(gap(0.05) <= 2.0 * c * 0.05 * 0.05);
}

TEST_CASE("fixed-count mode performs exactly the requested sweeps") {
  Rng data_rng(1);
  BananaModel model(data_rng.normal_vector(30).array() + 1.0, 2.0, 1.0);
  Rng rng(2);
  IntegratorConfig cfg = tight_config(0.05, 4);
  cfg.fp_fixed_count = 6;

  const PhasePoint pm = random_state(model, rng, AuxKind::Momentum);
  const TrajectoryResult glf = integrate(model, pm, cfg, Integrator::GeneralizedLeapfrog);
  REQUIRE(glf.status == StepStatus::Ok);
  // two implicit updates per step
  CHECK(glf.fixed_point_iters == 2 * 6 * 4);

  const PhasePoint pv = random_state(model, rng, AuxKind::Velocity);
  const TrajectoryResult rml = integrate(model, pv, cfg, Integrator::Rmlmc);
  REQUIRE(rml.status == StepStatus::Ok);
  // one implicit update per step
  CHECK(rml.fixed_point_iters == 6 * 4);

  const TrajectoryResult erml = integrate(model, pv, cfg, Integrator::Ermlmc);
  REQUIRE(erml.status == StepStatus::Ok);
  CHECK(erml.fixed_point_iters == 0);  // nothing iterative in the explicit stepper
}

TEST_CASE("divergent trajectories are flagged, not fatal") {
  Rng data_rng(40);
  BananaModel model(data_rng.normal_vector(100).array() + 1.0, 2.0, 1.0);
  Rng rng(41);
  IntegratorConfig cfg;
  cfg.epsilon = 50.0;  // absurd step size
  cfg.n_steps = 5;
  const PhasePoint pv = random_state(model, rng, AuxKind::Velocity);
  const TrajectoryResult r = integrate(model, pv, cfg, Integrator::Ermlmc);
  CHECK(r.diverged);
  CHECK(r.end_energy == std::numeric_limits<double>::infinity());
}

TEST_CASE("trace records every visited position") {
  testing::GaussianModel model(2);
  Rng rng(9);
  IntegratorConfig cfg = tight_config(0.1, 7);
  const PhasePoint pv = random_state(model, rng, AuxKind::Velocity);
  std::vector<Vector> trace;
  const TrajectoryResult r = integrate(model, pv, cfg, Integrator::Rmlmc, nullptr, nullptr, &trace);
  REQUIRE(r.status == StepStatus::Ok);
  CHECK(trace.size() == 8);
  CHECK(trace.front() == pv.theta);
  CHECK(trace.back() == r.end.theta);
}

TEST_CASE("nonconvergent fixed points are reported") {
  Rng data_rng(50);
  BananaModel model(data_rng.normal_vector(50).array() + 1.0, 2.0, 1.0);
  Rng rng(51);
  IntegratorConfig cfg;
  cfg.epsilon = 0.4;
  cfg.n_steps = 1;
  cfg.fp_tol = 1e-16;  // unattainable
  cfg.fp_max = 3;
  const PhasePoint pm = random_state(model, rng, AuxKind::Momentum);
  const auto r = generalized_leapfrog_step(model, pm, cfg);
  CHECK(r.status == StepStatus::FixedPointNoConvergence);
}
