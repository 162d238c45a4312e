#include "lmc/models/logistic.hpp"

#include <cmath>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

// log(1 + e^t) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace

LogisticRegressionModel::LogisticRegressionModel(Matrix x, Vector y, double alpha)
    : x_(std::move(x)), y_(std::move(y)), alpha_(alpha) {
  if (x_.rows() != y_.size())
    throw DimensionMismatch("logistic: covariate rows != label count");
  if (x_.rows() < 1 || x_.cols() < 1) throw DimensionMismatch("logistic: empty design matrix");
  if (alpha_ <= 0.0) throw DimensionMismatch("logistic: prior variance must be positive");
  for (Eigen::Index i = 0; i < y_.size(); ++i)
    if (y_[i] != 0.0 && y_[i] != 1.0)
      throw DimensionMismatch("logistic: labels must be 0 or 1");
}

LogisticRegressionModel LogisticRegressionModel::from_dataset(const Dataset& data, double alpha,
                                                              bool standardize) {
  if (!data.has_labels()) throw DimensionMismatch("logistic: dataset has no label column");
  Matrix z = data.x;
  if (standardize) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double mean = z.col(j).mean();
      const double sd = std::sqrt((z.col(j).array() - mean).square().sum() /
                                  static_cast<double>(z.rows()));
      if (sd > 0.0) z.col(j) = (z.col(j).array() - mean) / sd;
    }
  }
  Matrix x(z.rows(), z.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(z.cols()) = z;
  return LogisticRegressionModel(std::move(x), data.y, alpha);
}

double LogisticRegressionModel::log_density(const Vector& theta) const {
  const Vector lin = x_ * theta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < lin.size(); ++i) ll += y_[i] * lin[i] - softplus(lin[i]);
  return ll - theta.squaredNorm() / (2.0 * alpha_);
}

Vector LogisticRegressionModel::grad_log_density(const Vector& theta) const {
  const Vector lin = x_ * theta;
  Vector s(lin.size());
  for (Eigen::Index i = 0; i < lin.size(); ++i) s[i] = 1.0 / (1.0 + std::exp(-lin[i]));
  return x_.transpose() * (y_ - s) - theta / alpha_;
}

Matrix LogisticRegressionModel::metric(const Vector& theta) const {
  const Vector lin = x_ * theta;
  Vector lam(lin.size());
  for (Eigen::Index i = 0; i < lin.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-lin[i]));
    lam[i] = s * (1.0 - s);
  }
  Matrix g = x_.transpose() * lam.asDiagonal() * x_;
  g.diagonal().array() += 1.0 / alpha_;
  return g;
}

Tensor3 LogisticRegressionModel::metric_deriv(const Vector& theta) const {
  const Vector lin = x_ * theta;
  Vector w(lin.size());
  for (Eigen::Index i = 0; i < lin.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-lin[i]));
    w[i] = s * (1.0 - s) * (1.0 - 2.0 * s);  // d lambda / d lin
  }
  const int d = dim();
  Tensor3 out(d);
  for (int k = 0; k < d; ++k) {
    const Vector wk = w.cwiseProduct(x_.col(k));
    out[k] = x_.transpose() * wk.asDiagonal() * x_;
  }
  return out;
}

}  // namespace lmc
