#pragma once

#include <optional>
#include <vector>

#include "lmc/geometry.hpp"
#include "lmc/model.hpp"

namespace lmc {

enum class AuxKind { Momentum, Velocity };

// One point of the extended state space. aux is a momentum for the
// Hamiltonian-form steppers and a velocity for the Lagrangian-form ones.
struct PhasePoint {
  Vector theta;
  Vector aux;
  AuxKind kind = AuxKind::Momentum;
};

enum class Integrator { Leapfrog, GeneralizedLeapfrog, Rmlmc, Ermlmc };

struct IntegratorConfig {
  double epsilon = 0.1;
  int n_steps = 10;
  double fp_tol = 1e-10;  // sup-norm stopping rule for the implicit updates
  int fp_max = 100;
  // > 0 pins every implicit update to exactly this many sweeps (no tolerance
  // test), which makes per-step cost deterministic for timing comparisons.
  int fp_fixed_count = 0;
};

enum class StepStatus {
  Ok,
  FixedPointNoConvergence,
  NotPositiveDefinite,  // metric Cholesky failed at a visited position
  SingularUpdate,       // an exactly singular volume-correction factor
};

// Geometry shared between consecutive steps so each position is evaluated
// once: the metric bundle plus grad phi, phi = -log p + 0.5 log det G, and
// whichever connection coefficients the stepper needs.
struct GeoCache {
  MetricBundle bundle;
  double log_density = 0.0;
  Vector grad_log_density;
  Vector grad_phi;
  std::optional<ChristoffelSecond> gamma;
  std::optional<ChristoffelFirst> gamma_tilde;
};

enum class GeoNeeds { MetricOnly, Gamma, GammaTilde };

std::optional<GeoCache> make_geo_cache(const TargetModel& model, const Vector& theta,
                                       GeoNeeds needs);

// Hamiltonian-form energy -log p + 0.5 log det G + 0.5 p^T G^-1 p.
double hamiltonian_from(const GeoCache& cache, const Vector& p);
// Lagrangian-form energy -log p - 0.5 log det G + 0.5 v^T G v.
double energy_from(const GeoCache& cache, const Vector& v);

struct StepResult {
  PhasePoint state;
  double log_jacobian = 0.0;  // log |det| of this step's position-velocity map
  int fp_iters = 0;
  StepStatus status = StepStatus::Ok;
  bool jacobian_sign_flip = false;
  std::optional<GeoCache> end_cache;
};

// Plain leapfrog under a constant diagonal mass; aux is a momentum.
StepResult leapfrog_step(const TargetModel& model, const PhasePoint& state, double epsilon,
                         const Vector& inv_mass_diag);

// Implicit generalized leapfrog for the momentum-form dynamics; volume
// preserving, so log_jacobian stays zero.
StepResult generalized_leapfrog_step(const TargetModel& model, const PhasePoint& state,
                                     const IntegratorConfig& config, const GeoCache& start);
StepResult generalized_leapfrog_step(const TargetModel& model, const PhasePoint& state,
                                     const IntegratorConfig& config);

// Semi-explicit velocity-form step: one implicit half kick with frozen
// geometry, an explicit drift, an explicit half kick. log_jacobian carries
// the step's volume correction.
StepResult rmlmc_step(const TargetModel& model, const PhasePoint& state,
                      const IntegratorConfig& config, const GeoCache& start);
StepResult rmlmc_step(const TargetModel& model, const PhasePoint& state,
                      const IntegratorConfig& config);

// Fully explicit velocity-form step: each half kick is a single linear
// solve, and the same factorization supplies its volume-correction term.
StepResult ermlmc_step(const TargetModel& model, const PhasePoint& state, double epsilon,
                       const GeoCache& start);
StepResult ermlmc_step(const TargetModel& model, const PhasePoint& state, double epsilon);

struct TrajectoryResult {
  PhasePoint end;
  double log_jacobian = 0.0;
  double start_energy = 0.0;
  double end_energy = 0.0;
  int fixed_point_iters = 0;
  bool diverged = false;
  StepStatus status = StepStatus::Ok;
  bool jacobian_sign_flip = false;
  std::optional<GeoCache> end_cache;
};

// Runs n_steps of the chosen stepper with energy bookkeeping. A trajectory
// is flagged diverged when the energy drifts by more than 1000 or anything
// becomes non-finite. inv_mass_diag is only read by Leapfrog; start_cache,
// when given, must describe start.theta. trace, when given, receives the
// n_steps + 1 visited positions.
TrajectoryResult integrate(const TargetModel& model, const PhasePoint& start,
                           const IntegratorConfig& config, Integrator which,
                           const Vector* inv_mass_diag = nullptr,
                           const GeoCache* start_cache = nullptr,
                           std::vector<Vector>* trace = nullptr);

GeoNeeds geo_needs_for(Integrator which);

}  // namespace lmc
