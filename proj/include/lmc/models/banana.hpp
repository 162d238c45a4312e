#pragma once

#include "lmc/model.hpp"
#include "lmc/models/dataset.hpp"

namespace lmc {

// Two-parameter curved posterior: y_i ~ N(theta_0 + theta_1^2, sigma_y^2)
// with an isotropic N(0, sigma_theta^2) prior. The likelihood only sees
// theta_0 + theta_1^2, so the posterior concentrates on a parabola.
class BananaModel final : public TargetModel {
 public:
  BananaModel(Vector y, double sigma_y = 2.0, double sigma_theta = 1.0);

  static BananaModel from_dataset(const Dataset& data, double sigma_y = 2.0,
                                  double sigma_theta = 1.0);

  int dim() const override { return 2; }
  double log_density(const Vector& theta) const override;
  Vector grad_log_density(const Vector& theta) const override;
  Matrix metric(const Vector& theta) const override;
  Tensor3 metric_deriv(const Vector& theta) const override;

  Eigen::Index n_obs() const { return y_.size(); }

 private:
  Vector y_;
  double sum_y_;
  double sigma_y2_, sigma_theta2_;
};

}  // namespace lmc
