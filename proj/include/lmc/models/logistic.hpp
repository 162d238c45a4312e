#pragma once

#include "lmc/model.hpp"
#include "lmc/models/dataset.hpp"

namespace lmc {

// Bayesian logistic regression with a N(0, alpha I) coefficient prior and
// the regularized Fisher information as metric: X^T Lambda(theta) X + I/alpha
// with Lambda = diag(sigma (1 - sigma)).
class LogisticRegressionModel final : public TargetModel {
 public:
  // x already contains the intercept column; y entries must be 0/1.
  LogisticRegressionModel(Matrix x, Vector y, double alpha = 100.0);

  // Standardizes the covariates (constant columns are left alone) and
  // prepends an intercept column.
  static LogisticRegressionModel from_dataset(const Dataset& data, double alpha = 100.0,
                                              bool standardize = true);

  int dim() const override { return static_cast<int>(x_.cols()); }
  double log_density(const Vector& theta) const override;
  Vector grad_log_density(const Vector& theta) const override;
  Matrix metric(const Vector& theta) const override;
  Tensor3 metric_deriv(const Vector& theta) const override;

  double alpha() const { return alpha_; }
  Eigen::Index n_obs() const { return x_.rows(); }

 private:
  Matrix x_;  // n x d, intercept first
  Vector y_;
  double alpha_;
};

}  // namespace lmc
