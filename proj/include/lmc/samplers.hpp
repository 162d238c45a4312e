#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmc/diagnostics.hpp"
#include "lmc/integrators.hpp"
#include "lmc/rng.hpp"

namespace lmc {

// hmc: leapfrog under a constant diagonal mass
// rmhmc: implicit generalized leapfrog on the momentum-form dynamics
// rmlmc: semi-explicit velocity-form stepper with volume correction
// ermlmc: fully explicit velocity-form stepper with volume correction
// rwm: isotropic random-walk proposal (demo baseline, scale = epsilon)
enum class Method { Hmc, Rmhmc, Rmlmc, Ermlmc, Rwm };

std::string method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

struct SamplerSpec {
  Method method = Method::Rmhmc;
  IntegratorConfig integ;
  std::optional<Vector> mass_diag;  // hmc only; identity when absent
  std::uint64_t seed = 0;
  // Diagnostic switch: false drops the velocity-form Jacobian term from the
  // acceptance ratio, which deliberately breaks the invariant distribution.
  bool volume_correction = true;
};

Vector refresh_momentum(const MetricBundle& bundle, Rng& rng);  // p = L z
Vector refresh_velocity(const MetricBundle& bundle, Rng& rng);  // v = L^-T z

double hamiltonian(const TargetModel& model, const Vector& theta, const Vector& p);
double energy(const TargetModel& model, const Vector& theta, const Vector& v);

struct ChainState {
  Vector theta;
  std::optional<GeoCache> cache;  // geometry at theta, kept warm between steps
  Rng rng;
  ChainState(Vector theta0, std::uint64_t seed) : theta(std::move(theta0)), rng(seed) {}
};

struct MhResult {
  bool accepted = false;
  double log_ratio = 0.0;
  bool diverged = false;
  StepStatus status = StepStatus::Ok;
  int fixed_point_iters = 0;
  bool jacobian_sign_flip = false;
};

// Positions visited inside each transition: one inner vector per iteration,
// holding n_steps + 1 points for the trajectory methods (fewer if the
// trajectory aborted early) and the single current position for rwm.
using TraceLog = std::vector<std::vector<Vector>>;

// One Metropolis-Hastings transition of the configured method. Trajectories
// that diverge or fail are rejected.
MhResult mh_step(const TargetModel& model, ChainState& chain, const SamplerSpec& spec,
                 TraceLog* trace = nullptr);

struct ChainDiagnostics {
  long long divergences = 0;
  long long metric_failures = 0;
  long long singular_updates = 0;
  long long fixed_point_failures = 0;
  long long fixed_point_iters = 0;
  long long jacobian_sign_flips = 0;
};

struct ChainSummary {
  Matrix samples;  // post burn-in draws, kept x dim
  double acceptance_rate = 0.0;
  double seconds_per_iteration = 0.0;
  double total_seconds = 0.0;  // post burn-in CPU time
  EssReport ess;
  ChainDiagnostics diagnostics;
};

// Runs the chain for n_iterations transitions, discards burn_in of them, and
// summarizes the rest. Acceptance rate and timing cover the kept phase only;
// identical inputs produce identical output (bit for bit).
ChainSummary run_chain(const TargetModel& model, const SamplerSpec& spec, int n_iterations,
                       int burn_in, std::optional<Vector> theta0 = std::nullopt,
                       TraceLog* trace = nullptr);

// Bisects log epsilon until a pilot run's acceptance rate lands in
// [ap_low, ap_high]. A positive trajectory_length re-derives n_steps from
// each probed epsilon so the total integration time stays fixed.
double tune_step_size(const TargetModel& model, SamplerSpec spec, double eps_lo, double eps_hi,
                      double ap_low, double ap_high, int pilot_iters, int max_rounds = 20,
                      double trajectory_length = 0.0,
                      std::optional<Vector> theta0 = std::nullopt);

// Thread CPU time in seconds; the per-iteration cost basis.
double thread_cpu_seconds();

}  // namespace lmc
