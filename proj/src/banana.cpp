#include "lmc/models/banana.hpp"

#include "lmc/errors.hpp"

namespace lmc {

BananaModel::BananaModel(Vector y, double sigma_y, double sigma_theta)
    : y_(std::move(y)),
      sum_y_(y_.sum()),
      sigma_y2_(sigma_y * sigma_y),
      sigma_theta2_(sigma_theta * sigma_theta) {
  if (y_.size() < 1) throw DimensionMismatch("banana: empty observation vector");
  if (sigma_y <= 0.0 || sigma_theta <= 0.0)
    throw DimensionMismatch("banana: scales must be positive");
}

BananaModel BananaModel::from_dataset(const Dataset& data, double sigma_y, double sigma_theta) {
  if (data.x.cols() != 1)
    throw DimensionMismatch("banana: expected a single observation column");
  return BananaModel(data.x.col(0), sigma_y, sigma_theta);
}

double BananaModel::log_density(const Vector& theta) const {
  const double mean = theta[0] + theta[1] * theta[1];
  const double rss = (y_.array() - mean).square().sum();
  return -rss / (2.0 * sigma_y2_) - theta.squaredNorm() / (2.0 * sigma_theta2_);
}

Vector BananaModel::grad_log_density(const Vector& theta) const {
  const double mean = theta[0] + theta[1] * theta[1];
  const double n = static_cast<double>(y_.size());
  const double resid_sum = sum_y_ - n * mean;
  Vector g(2);
  g[0] = resid_sum / sigma_y2_ - theta[0] / sigma_theta2_;
  g[1] = 2.0 * theta[1] * resid_sum / sigma_y2_ - theta[1] / sigma_theta2_;
  return g;
}

Matrix BananaModel::metric(const Vector& theta) const {
  // Fisher information of the mean map (1, 2 theta_1) plus the prior precision.
  const double n = static_cast<double>(y_.size());
  const double c = n / sigma_y2_;
  const double t = theta[1];
  Matrix g(2, 2);
  g(0, 0) = c + 1.0 / sigma_theta2_;
  g(0, 1) = c * 2.0 * t;
  g(1, 0) = g(0, 1);
  g(1, 1) = c * 4.0 * t * t + 1.0 / sigma_theta2_;
  return g;
}

Tensor3 BananaModel::metric_deriv(const Vector& theta) const {
  const double c = static_cast<double>(y_.size()) / sigma_y2_;
  Tensor3 out(2, Matrix::Zero(2, 2));
  out[1](0, 1) = out[1](1, 0) = 2.0 * c;
  out[1](1, 1) = 8.0 * c * theta[1];
  return out;
}

}  // namespace lmc
