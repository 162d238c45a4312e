#include "lmc/integrators.hpp"

#include <cmath>
#include <limits>

namespace lmc {

namespace {

constexpr double kDivergenceThreshold = 1000.0;

struct LogAbsDet {
  double value = 0.0;
  int sign = 0;  // 0 means singular
};

LogAbsDet log_abs_det(const Matrix& m) {
  Eigen::PartialPivLU<Matrix> lu(m);
  LogAbsDet out;
  out.sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = lu.matrixLU()(i, i);
    if (d == 0.0 || !std::isfinite(d)) {
      out.sign = 0;
      return out;
    }
    if (d < 0.0) out.sign = -out.sign;
    out.value += std::log(std::abs(d));
  }
  return out;
}

// Shared fixed-point driver: iterates x <- f(x) from x0 until the sup-norm
// update drops below fp_tol (or exactly fp_fixed_count sweeps when pinned).
template <typename F>
bool fixed_point(const IntegratorConfig& cfg, Vector& x, int& iters, F&& f) {
  if (cfg.fp_fixed_count > 0) {
    for (int i = 0; i < cfg.fp_fixed_count; ++i) {
      x = f(x);
      ++iters;
      if (!x.allFinite()) return false;
    }
    return true;
  }
  for (int i = 0; i < cfg.fp_max; ++i) {
    Vector next = f(x);
    ++iters;
    if (!next.allFinite()) {
      x = std::move(next);
      return false;
    }
    const double delta = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    if (delta <= cfg.fp_tol) return true;
  }
  return false;
}

}  // namespace

GeoNeeds geo_needs_for(Integrator which) {
  switch (which) {
    case Integrator::Rmlmc:
      return GeoNeeds::Gamma;
    case Integrator::Ermlmc:
      return GeoNeeds::GammaTilde;
    default:
      return GeoNeeds::MetricOnly;
  }
}

std::optional<GeoCache> make_geo_cache(const TargetModel& model, const Vector& theta,
                                       GeoNeeds needs) {
  auto bundle = build_metric_bundle(model, theta);
  if (!bundle) return std::nullopt;

  GeoCache cache;
  cache.bundle = std::move(*bundle);
  cache.log_density = model.log_density(theta);
  cache.grad_log_density = model.grad_log_density(theta);
  if (!std::isfinite(cache.log_density) || !cache.grad_log_density.allFinite())
    return std::nullopt;

  // d/dtheta_i of 0.5 log det G = 0.5 tr(G^-1 dG_i)
  const int d = cache.bundle.dim();
  cache.grad_phi.resize(d);
  for (int i = 0; i < d; ++i)
    cache.grad_phi[i] =
        -cache.grad_log_density[i] + 0.5 * cache.bundle.g_inv.cwiseProduct(cache.bundle.dg[i]).sum();

  if (needs == GeoNeeds::Gamma) {
    cache.gamma = christoffel_second(cache.bundle);
  } else if (needs == GeoNeeds::GammaTilde) {
    cache.gamma_tilde = christoffel_first(cache.bundle);
  }
  return cache;
}

double hamiltonian_from(const GeoCache& cache, const Vector& p) {
  return -cache.log_density + 0.5 * cache.bundle.log_det + 0.5 * p.dot(cache.bundle.solve(p));
}

double energy_from(const GeoCache& cache, const Vector& v) {
  return -cache.log_density - 0.5 * cache.bundle.log_det + 0.5 * v.dot(cache.bundle.g * v);
}

StepResult leapfrog_step(const TargetModel& model, const PhasePoint& state, double epsilon,
                         const Vector& inv_mass_diag) {
  StepResult r;
  Vector p = state.aux + 0.5 * epsilon * model.grad_log_density(state.theta);
  Vector theta = state.theta + epsilon * inv_mass_diag.cwiseProduct(p);
  p += 0.5 * epsilon * model.grad_log_density(theta);
  r.state = PhasePoint{std::move(theta), std::move(p), AuxKind::Momentum};
  return r;
}

StepResult generalized_leapfrog_step(const TargetModel& model, const PhasePoint& state,
                                     const IntegratorConfig& config, const GeoCache& start) {
  StepResult r;
  const double eps = config.epsilon;
  const MetricBundle& b0 = start.bundle;

  // implicit half kick: p_half = p - (eps/2) [grad phi - 0.5 nu(theta, p_half)]
  Vector p_half = state.aux;
  const bool kick_ok = fixed_point(config, p_half, r.fp_iters, [&](const Vector& q) -> Vector {
    return state.aux - 0.5 * eps * (start.grad_phi - 0.5 * nu_vector(b0, q));
  });

  // implicit drift: theta' = theta + (eps/2) [G^-1(theta) + G^-1(theta')] p_half
  const Vector drift0 = b0.solve(p_half);
  Vector theta_new = state.theta;
  bool drift_ok = kick_ok && p_half.allFinite();
  bool spd_ok = true;
  if (drift_ok) {
    drift_ok = fixed_point(config, theta_new, r.fp_iters, [&](const Vector& t) -> Vector {
      const Matrix g = model.metric(t);
      Eigen::LLT<Matrix> llt(Matrix(0.5 * (g + g.transpose())));
      if (llt.info() != Eigen::Success) {
        spd_ok = false;
        return Vector::Constant(t.size(), std::numeric_limits<double>::quiet_NaN());
      }
      return state.theta + 0.5 * eps * (drift0 + llt.solve(p_half));
    });
  }
  if (!spd_ok) {
    r.status = StepStatus::NotPositiveDefinite;
    r.state = state;
    return r;
  }
  if (!theta_new.allFinite()) {
    r.status = StepStatus::FixedPointNoConvergence;
    r.state = state;
    return r;
  }

  auto end = make_geo_cache(model, theta_new, GeoNeeds::MetricOnly);
  if (!end) {
    r.status = StepStatus::NotPositiveDefinite;
    r.state = state;
    return r;
  }

  // explicit half kick at the new position
  Vector p_new =
      p_half - 0.5 * eps * (end->grad_phi - 0.5 * nu_vector(end->bundle, p_half));
  r.state = PhasePoint{std::move(theta_new), std::move(p_new), AuxKind::Momentum};
  r.end_cache = std::move(end);
  if (!(kick_ok && drift_ok)) r.status = StepStatus::FixedPointNoConvergence;
  return r;
}

StepResult rmlmc_step(const TargetModel& model, const PhasePoint& state,
                      const IntegratorConfig& config, const GeoCache& start) {
  StepResult r;
  const double eps = config.epsilon;
  const ChristoffelSecond& gamma0 = *start.gamma;

  // implicit half kick with all geometry frozen at theta: no model calls
  const Vector pull0 = start.bundle.solve(start.grad_phi);
  Vector v_half = state.aux;
  const bool kick_ok = fixed_point(config, v_half, r.fp_iters, [&](const Vector& q) -> Vector {
    return state.aux - 0.5 * eps * (eta_vector(gamma0, q) + pull0);
  });
  if (!v_half.allFinite()) {
    r.status = StepStatus::FixedPointNoConvergence;
    r.state = state;
    return r;
  }

  const Vector theta_new = state.theta + eps * v_half;

  // volume correction, both factors at the full step size
  const LogAbsDet before = log_abs_det(
      Matrix::Identity(state.theta.size(), state.theta.size()) + eps * omega_matrix(gamma0, v_half));
  auto end = make_geo_cache(model, theta_new, GeoNeeds::Gamma);
  if (!end) {
    r.status = StepStatus::NotPositiveDefinite;
    r.state = state;
    return r;
  }
  const LogAbsDet after = log_abs_det(
      Matrix::Identity(state.theta.size(), state.theta.size()) - eps * omega_matrix(*end->gamma, v_half));
  if (before.sign == 0 || after.sign == 0) {
    r.status = StepStatus::SingularUpdate;
    r.state = state;
    return r;
  }
  r.log_jacobian = after.value - before.value;
  r.jacobian_sign_flip = before.sign * after.sign < 0;

  // explicit half kick at the new position
  Vector v_new =
      v_half - 0.5 * eps * (eta_vector(*end->gamma, v_half) + end->bundle.solve(end->grad_phi));
  r.state = PhasePoint{theta_new, std::move(v_new), AuxKind::Velocity};
  r.end_cache = std::move(end);
  if (!kick_ok) r.status = StepStatus::FixedPointNoConvergence;
  return r;
}

StepResult ermlmc_step(const TargetModel& model, const PhasePoint& state, double epsilon,
                       const GeoCache& start) {
  StepResult r;
  const double h = 0.5 * epsilon;
  int sign = 1;
  double log_jac = 0.0;

  auto half_kick = [&](const GeoCache& cache, const Vector& v_in,
                       Vector& v_out) -> StepStatus {
    const Matrix omega_in = omega_tilde_matrix(*cache.gamma_tilde, v_in);
    Eigen::PartialPivLU<Matrix> lu(cache.bundle.g + h * omega_in);
    LogAbsDet fwd;
    fwd.sign = lu.permutationP().determinant();
    for (Eigen::Index i = 0; i < lu.matrixLU().rows(); ++i) {
      const double d = lu.matrixLU()(i, i);
      if (d == 0.0 || !std::isfinite(d)) return StepStatus::SingularUpdate;
      if (d < 0.0) fwd.sign = -fwd.sign;
      fwd.value += std::log(std::abs(d));
    }
    v_out = lu.solve(cache.bundle.g * v_in - h * cache.grad_phi);
    if (!v_out.allFinite()) return StepStatus::SingularUpdate;
    const LogAbsDet bwd =
        log_abs_det(cache.bundle.g - h * omega_tilde_matrix(*cache.gamma_tilde, v_out));
    if (bwd.sign == 0) return StepStatus::SingularUpdate;
    log_jac += bwd.value - fwd.value;
    sign *= fwd.sign * bwd.sign;
    return StepStatus::Ok;
  };

  Vector v_half;
  StepStatus st = half_kick(start, state.aux, v_half);
  if (st != StepStatus::Ok) {
    r.status = st;
    r.state = state;
    return r;
  }

  const Vector theta_new = state.theta + epsilon * v_half;
  auto end = make_geo_cache(model, theta_new, GeoNeeds::GammaTilde);
  if (!end) {
    r.status = StepStatus::NotPositiveDefinite;
    r.state = state;
    return r;
  }

  Vector v_new;
  st = half_kick(*end, v_half, v_new);
  if (st != StepStatus::Ok) {
    r.status = st;
    r.state = state;
    return r;
  }

  r.log_jacobian = log_jac;
  r.jacobian_sign_flip = sign < 0;
  r.state = PhasePoint{theta_new, std::move(v_new), AuxKind::Velocity};
  r.end_cache = std::move(end);
  return r;
}

StepResult generalized_leapfrog_step(const TargetModel& model, const PhasePoint& state,
                                     const IntegratorConfig& config) {
  auto cache = make_geo_cache(model, state.theta, GeoNeeds::MetricOnly);
  if (!cache) return StepResult{state, 0.0, 0, StepStatus::NotPositiveDefinite, false, {}};
  return generalized_leapfrog_step(model, state, config, *cache);
}

StepResult rmlmc_step(const TargetModel& model, const PhasePoint& state,
                      const IntegratorConfig& config) {
  auto cache = make_geo_cache(model, state.theta, GeoNeeds::Gamma);
  if (!cache) return StepResult{state, 0.0, 0, StepStatus::NotPositiveDefinite, false, {}};
  return rmlmc_step(model, state, config, *cache);
}

StepResult ermlmc_step(const TargetModel& model, const PhasePoint& state, double epsilon) {
  auto cache = make_geo_cache(model, state.theta, GeoNeeds::GammaTilde);
  if (!cache) return StepResult{state, 0.0, 0, StepStatus::NotPositiveDefinite, false, {}};
  return ermlmc_step(model, state, epsilon, *cache);
}

TrajectoryResult integrate(const TargetModel& model, const PhasePoint& start,
                           const IntegratorConfig& config, Integrator which,
                           const Vector* inv_mass_diag, const GeoCache* start_cache,
                           std::vector<Vector>* trace) {
  TrajectoryResult out;
  out.end = start;
  const bool geometric = which != Integrator::Leapfrog;

  Vector unit_inv_mass;
  if (which == Integrator::Leapfrog && inv_mass_diag == nullptr) {
    unit_inv_mass = Vector::Ones(start.theta.size());
    inv_mass_diag = &unit_inv_mass;
  }

  GeoCache cache;
  if (geometric) {
    if (start_cache != nullptr) {
      cache = *start_cache;
    } else {
      auto built = make_geo_cache(model, start.theta, geo_needs_for(which));
      if (!built) {
        out.status = StepStatus::NotPositiveDefinite;
        out.diverged = true;
        out.end_energy = std::numeric_limits<double>::infinity();
        return out;
      }
      cache = std::move(*built);
    }
  }

  auto current_energy = [&](const PhasePoint& s) -> double {
    switch (which) {
      case Integrator::Leapfrog:
        return -model.log_density(s.theta) +
               0.5 * s.aux.dot(inv_mass_diag->cwiseProduct(s.aux));
      case Integrator::GeneralizedLeapfrog:
        return hamiltonian_from(cache, s.aux);
      default:
        return energy_from(cache, s.aux);
    }
  };

  out.start_energy = current_energy(start);
  if (trace != nullptr) trace->push_back(start.theta);
  if (!std::isfinite(out.start_energy)) {
    out.diverged = true;
    out.end_energy = std::numeric_limits<double>::infinity();
    return out;
  }

  for (int step = 0; step < config.n_steps; ++step) {
    StepResult r;
    switch (which) {
      case Integrator::Leapfrog:
        r = leapfrog_step(model, out.end, config.epsilon, *inv_mass_diag);
        break;
      case Integrator::GeneralizedLeapfrog:
        r = generalized_leapfrog_step(model, out.end, config, cache);
        break;
      case Integrator::Rmlmc:
        r = rmlmc_step(model, out.end, config, cache);
        break;
      case Integrator::Ermlmc:
        r = ermlmc_step(model, out.end, config.epsilon, cache);
        break;
    }
    out.fixed_point_iters += r.fp_iters;
    if (r.status != StepStatus::Ok) {
      out.status = r.status;
      out.diverged = true;
      out.end_energy = std::numeric_limits<double>::infinity();
      return out;
    }
    out.end = std::move(r.state);
    out.log_jacobian += r.log_jacobian;
    if (r.jacobian_sign_flip) out.jacobian_sign_flip = !out.jacobian_sign_flip;
    if (geometric) cache = std::move(*r.end_cache);

    const double e = current_energy(out.end);
    out.end_energy = e;
    if (!std::isfinite(e) || std::abs(e - out.start_energy) > kDivergenceThreshold) {
      out.diverged = true;
      out.end_energy = std::numeric_limits<double>::infinity();
      return out;
    }
    if (trace != nullptr) trace->push_back(out.end.theta);
  }
  if (geometric) out.end_cache = std::move(cache);
  return out;
}

}  // namespace lmc
