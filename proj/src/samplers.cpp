#include "lmc/samplers.hpp"

#include <cmath>
#include <ctime>
#include <limits>
#include <stdexcept>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

Integrator integrator_for(Method m) {
  switch (m) {
    case Method::Hmc:
      return Integrator::Leapfrog;
    case Method::Rmhmc:
      return Integrator::GeneralizedLeapfrog;
    case Method::Rmlmc:
      return Integrator::Rmlmc;
    case Method::Ermlmc:
      return Integrator::Ermlmc;
    default:
      throw std::logic_error("no integrator for this method");
  }
}

bool velocity_form(Method m) { return m == Method::Rmlmc || m == Method::Ermlmc; }

}  // namespace

double thread_cpu_seconds() {
#ifdef CLOCK_THREAD_CPUTIME_ID
  timespec ts;
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
#else
  return static_cast<double>(std::clock()) / CLOCKS_PER_SEC;
#endif
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Hmc:
      return "hmc";
    case Method::Rmhmc:
      return "rmhmc";
    case Method::Rmlmc:
      return "rmlmc";
    case Method::Ermlmc:
      return "ermlmc";
    case Method::Rwm:
      return "rwm";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "hmc") return Method::Hmc;
  if (name == "rmhmc") return Method::Rmhmc;
  if (name == "rmlmc") return Method::Rmlmc;
  if (name == "ermlmc") return Method::Ermlmc;
  if (name == "rwm") return Method::Rwm;
  return std::nullopt;
}

Vector refresh_momentum(const MetricBundle& bundle, Rng& rng) {
  return bundle.chol * rng.normal_vector(bundle.theta.size());
}

Vector refresh_velocity(const MetricBundle& bundle, Rng& rng) {
  Vector v = rng.normal_vector(bundle.theta.size());
  bundle.chol.triangularView<Eigen::Lower>().transpose().solveInPlace(v);
  return v;
}

double hamiltonian(const TargetModel& model, const Vector& theta, const Vector& p) {
  auto cache = make_geo_cache(model, theta, GeoNeeds::MetricOnly);
  if (!cache) return std::numeric_limits<double>::infinity();
  return hamiltonian_from(*cache, p);
}

double energy(const TargetModel& model, const Vector& theta, const Vector& v) {
  auto cache = make_geo_cache(model, theta, GeoNeeds::MetricOnly);
  if (!cache) return std::numeric_limits<double>::infinity();
  return energy_from(*cache, v);
}

MhResult mh_step(const TargetModel& model, ChainState& chain, const SamplerSpec& spec,
                 TraceLog* trace) {
  MhResult out;
  std::vector<Vector>* steps = nullptr;
  if (trace != nullptr) {
    trace->emplace_back();
    steps = &trace->back();
  }

  if (spec.method == Method::Rwm) {
    const Vector step = spec.integ.epsilon * chain.rng.normal_vector(chain.theta.size());
    const Vector proposal = chain.theta + step;
    out.log_ratio = model.log_density(proposal) - model.log_density(chain.theta);
    const double u = chain.rng.uniform01();
    if (std::log(u) < out.log_ratio) {
      out.accepted = true;
      chain.theta = proposal;
    }
    if (steps != nullptr) steps->push_back(chain.theta);
    return out;
  }

  const Integrator which = integrator_for(spec.method);

  if (spec.method == Method::Hmc) {
    const Eigen::Index d = chain.theta.size();
    Vector mass = spec.mass_diag.value_or(Vector::Ones(d));
    if (mass.size() != d) throw DimensionMismatch("mass diagonal does not match model dim");
    const Vector inv_mass = mass.cwiseInverse();
    const Vector p = mass.cwiseSqrt().cwiseProduct(chain.rng.normal_vector(d));

    const PhasePoint start{chain.theta, p, AuxKind::Momentum};
    const TrajectoryResult traj =
        integrate(model, start, spec.integ, which, &inv_mass, nullptr, steps);
    out.diverged = traj.diverged;
    out.status = traj.status;
    out.log_ratio = traj.start_energy - traj.end_energy;
    const double u = chain.rng.uniform01();
    if (!traj.diverged && std::log(u) < out.log_ratio) {
      out.accepted = true;
      chain.theta = traj.end.theta;
    }
    return out;
  }

  // geometric methods need the cache at the current position
  if (!chain.cache) {
    auto cache = make_geo_cache(model, chain.theta, geo_needs_for(which));
    if (!cache)
      throw std::runtime_error("metric is not positive definite at the chain position");
    chain.cache = std::move(*cache);
  }

  const bool velocity = velocity_form(spec.method);
  Vector aux = velocity ? refresh_velocity(chain.cache->bundle, chain.rng)
                        : refresh_momentum(chain.cache->bundle, chain.rng);
  const PhasePoint start{chain.theta, std::move(aux),
                         velocity ? AuxKind::Velocity : AuxKind::Momentum};

  const TrajectoryResult traj =
      integrate(model, start, spec.integ, which, nullptr, &*chain.cache, steps);
  out.diverged = traj.diverged;
  out.status = traj.status;
  out.fixed_point_iters = traj.fixed_point_iters;
  out.jacobian_sign_flip = traj.jacobian_sign_flip;

  out.log_ratio = traj.start_energy - traj.end_energy;
  if (velocity && spec.volume_correction) out.log_ratio += traj.log_jacobian;

  const double u = chain.rng.uniform01();
  const bool ok = !traj.diverged && traj.status == StepStatus::Ok && traj.end_cache.has_value();
  if (ok && std::log(u) < out.log_ratio) {
    out.accepted = true;
    chain.theta = traj.end.theta;
    chain.cache = traj.end_cache;
  }
  return out;
}

ChainSummary run_chain(const TargetModel& model, const SamplerSpec& spec, int n_iterations,
                       int burn_in, std::optional<Vector> theta0, TraceLog* trace) {
  if (burn_in < 0 || n_iterations <= burn_in)
    throw DimensionMismatch("run_chain needs n_iterations > burn_in >= 0");

  ChainState chain(theta0.value_or(model.initial_position()), spec.seed);
  if (chain.theta.size() != model.dim())
    throw DimensionMismatch("initial position does not match model dim");

  const int kept = n_iterations - burn_in;
  ChainSummary out;
  out.samples.resize(kept, model.dim());

  long long accepted = 0;
  double seconds = 0.0;
  for (int i = 0; i < n_iterations; ++i) {
    const double t0 = thread_cpu_seconds();
    const MhResult r = mh_step(model, chain, spec, trace);
    const double dt = thread_cpu_seconds() - t0;

    out.diagnostics.fixed_point_iters += r.fixed_point_iters;
    if (r.diverged) ++out.diagnostics.divergences;
    if (r.status == StepStatus::NotPositiveDefinite) ++out.diagnostics.metric_failures;
    if (r.status == StepStatus::SingularUpdate) ++out.diagnostics.singular_updates;
    if (r.status == StepStatus::FixedPointNoConvergence) ++out.diagnostics.fixed_point_failures;
    if (r.jacobian_sign_flip) ++out.diagnostics.jacobian_sign_flips;

    if (i >= burn_in) {
      out.samples.row(i - burn_in) = chain.theta;
      seconds += dt;
      if (r.accepted) ++accepted;
    }
  }

  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(kept);
  out.total_seconds = seconds;
  out.seconds_per_iteration = seconds / static_cast<double>(kept);
  out.ess = summarize(out.samples, seconds);
  return out;
}

double tune_step_size(const TargetModel& model, SamplerSpec spec, double eps_lo, double eps_hi,
                      double ap_low, double ap_high, int pilot_iters, int max_rounds,
                      double trajectory_length, std::optional<Vector> theta0) {
  if (!(eps_lo > 0.0 && eps_hi > eps_lo)) throw DimensionMismatch("bad step-size bracket");
  const int burn = pilot_iters / 5;

  auto probe = [&](double eps) -> double {
    SamplerSpec s = spec;
    s.integ.epsilon = eps;
    if (trajectory_length > 0.0)
      s.integ.n_steps = std::max(1, static_cast<int>(std::lround(trajectory_length / eps)));
    s.seed = mix_seed(spec.seed, 0x7e5);
    ChainSummary pilot = run_chain(model, s, pilot_iters, burn, theta0);
    return pilot.acceptance_rate;
  };

  double lo = eps_lo, hi = eps_hi;
  for (int round = 0; round < max_rounds; ++round) {
    const double mid = std::sqrt(lo * hi);
    const double ap = probe(mid);
    if (ap > ap_high) {
      lo = mid;  // acceptance too high: the step can afford to grow
    } else if (ap < ap_low) {
      hi = mid;
    } else {
      return mid;
    }
  }
  return std::sqrt(lo * hi);
}

}  // namespace lmc
