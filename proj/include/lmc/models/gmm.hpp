#pragma once

#include <optional>

#include "lmc/model.hpp"
#include "lmc/models/dataset.hpp"

namespace lmc {

// Univariate K-component Gaussian mixture sampled in an unconstrained
// parametrization: stick-breaking logits for the weights (K-1 coordinates),
// component means (K), and log variances (K), so dim = 3K - 1.
//
// The target includes the reparametrization log-Jacobians. The prior is
// Dirichlet(lambda) on the weights, N(m, var_k / beta) on each mean, and
// inverse-gamma(shape, scale) on each variance.
//
// The metric is the centered empirical Fisher information of the likelihood
// scores, regularized by 1e-6 * mean(diag) * I; the regularizer is
// differentiated through in metric_deriv.
class GaussianMixtureModel final : public TargetModel {
 public:
  struct Prior {
    double lambda = 1.0;
    double beta = 1.0;
    double ig_shape = 2.0;
    std::optional<double> mean_loc;  // default: sample mean of the data
    std::optional<double> ig_scale;  // default: sample variance of the data
  };

  GaussianMixtureModel(Vector data, int n_components, Prior prior);
  GaussianMixtureModel(Vector data, int n_components);
  static GaussianMixtureModel from_dataset(const Dataset& data, int n_components, Prior prior);
  static GaussianMixtureModel from_dataset(const Dataset& data, int n_components);

  int dim() const override { return 3 * k_ - 1; }
  double log_density(const Vector& z) const override;
  Vector grad_log_density(const Vector& z) const override;
  Matrix metric(const Vector& z) const override;
  Tensor3 metric_deriv(const Vector& z) const override;
  Vector initial_position() const override;

  // Constrained-space view of an unconstrained point.
  struct Params {
    Vector pi, mu, var;
  };
  Params constrain(const Vector& z) const;
  // Inverse of constrain on the interior of the simplex.
  Vector unconstrain(const Params& p) const;

  double log_likelihood(const Vector& z) const;
  // N x dim matrix of per-observation likelihood score vectors.
  Matrix score_matrix(const Vector& z) const;

  int components() const { return k_; }
  Eigen::Index n_obs() const { return data_.size(); }
  const Prior& prior() const { return prior_; }
  double prior_mean_loc() const { return mean_loc_; }
  double prior_ig_scale() const { return ig_scale_; }

 private:
  struct Unpacked;
  Unpacked unpack(const Vector& z) const;
  // Accumulates per-datum scores (and optionally Hessians) into the visitor.
  template <typename Visit>
  double scan_data(const Unpacked& q, bool with_hessian, Visit&& visit) const;

  Vector data_;
  int k_;
  Prior prior_;
  double mean_loc_, ig_scale_;
  static constexpr double kMetricReg = 1e-6;
};

}  // namespace lmc
