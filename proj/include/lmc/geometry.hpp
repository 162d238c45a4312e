#pragma once

#include <optional>

#include "lmc/model.hpp"
#include "lmc/types.hpp"

namespace lmc {

// Everything metric-derived at one position, built once and shared by the
// integrators. g and the dg slices are symmetrized on construction so the
// downstream Christoffel identities hold exactly.
struct MetricBundle {
  Vector theta;
  Matrix g;        // metric, SPD
  Matrix chol;     // lower Cholesky factor, g = chol * chol^T
  Matrix g_inv;
  double log_det = 0.0;  // 2 * sum(log diag(chol))
  Tensor3 dg;      // dg[i] = d g / d theta_i

  int dim() const { return static_cast<int>(theta.size()); }

  // Solve g x = b through the Cholesky factor.
  Vector solve(const Vector& b) const;
};

// Connection coefficients of the second kind, gamma[k](i,j) = Gamma^k_ij.
// Lower-index symmetry is enforced by averaging.
struct ChristoffelSecond {
  Tensor3 gamma;
};

// Coefficients of the first kind, gamma_tilde[k](i,j), symmetric in (i,j),
// with gamma_tilde[k] = sum_l g(k,l) * gamma[l].
struct ChristoffelFirst {
  Tensor3 gamma_tilde;
};

// nullopt when the metric is not positive definite at theta (or anything is
// non-finite); the caller decides whether to reject or abort.
std::optional<MetricBundle> build_metric_bundle(const TargetModel& model, const Vector& theta);

ChristoffelSecond christoffel_second(const MetricBundle& bundle);
ChristoffelFirst christoffel_first(const MetricBundle& bundle);

// nu_i = (g_inv p)^T dg[i] (g_inv p), the metric-gradient term of the
// momentum-form Hamiltonian flow.
Vector nu_vector(const MetricBundle& bundle, const Vector& p);

// eta_k = sum_ij Gamma^k_ij v_i v_j, the geodesic quadratic form.
Vector eta_vector(const ChristoffelSecond& gamma, const Vector& v);

// Omega(a,b) = sum_c v_c Gamma^a_cb. Contracting with v on the right gives
// eta: Omega(theta, v) v = eta(theta, v).
Matrix omega_matrix(const ChristoffelSecond& gamma, const Vector& v);

// OmegaTilde(k,j) = sum_i v_i gamma_tilde[k](i,j), equal to g * Omega.
Matrix omega_tilde_matrix(const ChristoffelFirst& gamma_tilde, const Vector& v);

}  // namespace lmc
