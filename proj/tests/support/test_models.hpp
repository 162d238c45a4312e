#pragma once

#include <cmath>

#include "lmc/model.hpp"

namespace lmc::testing {

// Standard normal target with the identity metric. The geometric steppers
// must degenerate to plain leapfrog on this model.
class GaussianModel final : public TargetModel {
 public:
  explicit GaussianModel(int dim) : dim_(dim) {}

  int dim() const override { return dim_; }
  double log_density(const Vector& theta) const override { return -0.5 * theta.squaredNorm(); }
  Vector grad_log_density(const Vector& theta) const override { return -theta; }
  Matrix metric(const Vector&) const override { return Matrix::Identity(dim_, dim_); }
  Tensor3 metric_deriv(const Vector&) const override {
    return Tensor3(dim_, Matrix::Zero(dim_, dim_));
  }

 private:
  int dim_;
};

// Gaussian with a fixed non-identity SPD metric: connection coefficients all
// vanish but the refresh distributions are nontrivial.
class ConstantMetricModel final : public TargetModel {
 public:
  explicit ConstantMetricModel(Matrix g) : g_(std::move(g)) {}

  int dim() const override { return static_cast<int>(g_.rows()); }
  double log_density(const Vector& theta) const override { return -0.5 * theta.squaredNorm(); }
  Vector grad_log_density(const Vector& theta) const override { return -theta; }
  Matrix metric(const Vector&) const override { return g_; }
  Tensor3 metric_deriv(const Vector&) const override {
    return Tensor3(dim(), Matrix::Zero(g_.rows(), g_.cols()));
  }

 private:
  Matrix g_;
};

// One dimension, metric g = theta^2 (positive definite away from zero).
// Every geometric quantity has a short closed form, which the geometry
// tests pin as frozen constants.
class ThetaSquaredModel final : public TargetModel {
 public:
  int dim() const override { return 1; }
  double log_density(const Vector& theta) const override { return -0.5 * theta.squaredNorm(); }
  Vector grad_log_density(const Vector& theta) const override { return -theta; }
  Matrix metric(const Vector& theta) const override {
    return Matrix::Constant(1, 1, theta[0] * theta[0]);
  }
  Tensor3 metric_deriv(const Vector& theta) const override {
    return Tensor3(1, Matrix::Constant(1, 1, 2.0 * theta[0]));
  }
};

// Standard normal target with metric 1 + theta^2: smooth, SPD everywhere,
// genuinely position dependent. Used for the volume-correction law test.
class OneDCurvedModel final : public TargetModel {
 public:
  int dim() const override { return 1; }
  double log_density(const Vector& theta) const override { return -0.5 * theta.squaredNorm(); }
  Vector grad_log_density(const Vector& theta) const override { return -theta; }
  Matrix metric(const Vector& theta) const override {
    return Matrix::Constant(1, 1, 1.0 + theta[0] * theta[0]);
  }
  Tensor3 metric_deriv(const Vector& theta) const override {
    return Tensor3(1, Matrix::Constant(1, 1, 2.0 * theta[0]));
  }
};

// Three-dimensional standard normal with a dense anisotropic metric
// Q diag(exp(a_i . theta + b_i)) Q^T for a fixed rotation Q. Exercises the
// full tensor machinery with an exact analytic derivative.
class RandomSpdModel final : public TargetModel {
 public:
  RandomSpdModel() {
    const double cx = std::cos(1.1), sx = std::sin(1.1);
    const double cy = std::cos(0.7), sy = std::sin(0.7);
    const double cz = std::cos(0.3), sz = std::sin(0.3);
    Matrix rx{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}};
    Matrix ry{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}};
    Matrix rz{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}};
    q_ = rz * ry * rx;
    a_ = Matrix{{0.30, -0.20, 0.10}, {-0.10, 0.25, 0.20}, {0.15, 0.10, -0.30}};
    b_ = Vector{{0.10, -0.20, 0.05}};
  }

  int dim() const override { return 3; }
  double log_density(const Vector& theta) const override { return -0.5 * theta.squaredNorm(); }
  Vector grad_log_density(const Vector& theta) const override { return -theta; }

  Matrix metric(const Vector& theta) const override {
    return q_ * eigenvalues(theta).asDiagonal() * q_.transpose();
  }

  Tensor3 metric_deriv(const Vector& theta) const override {
    const Vector lam = eigenvalues(theta);
    Tensor3 out(3);
    for (int e = 0; e < 3; ++e) {
      const Vector dlam = a_.col(e).cwiseProduct(lam);
      out[e] = q_ * dlam.asDiagonal() * q_.transpose();
    }
    return out;
  }

 private:
  Vector eigenvalues(const Vector& theta) const { return (a_ * theta + b_).array().exp(); }

  Matrix q_, a_;
  Vector b_;
};

}  // namespace lmc::testing
