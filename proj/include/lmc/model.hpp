#pragma once

#include "lmc/types.hpp"

namespace lmc {

// A target distribution equipped with a position-dependent metric.
//
// log_density is the unnormalized log target. metric must return a symmetric
// positive definite matrix; metric_deriv returns one symmetric slice per
// coordinate, slice i holding the elementwise derivative of the metric with
// respect to theta_i.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual int dim() const = 0;
  virtual double log_density(const Vector& theta) const = 0;
  virtual Vector grad_log_density(const Vector& theta) const = 0;
  virtual Matrix metric(const Vector& theta) const = 0;
  virtual Tensor3 metric_deriv(const Vector& theta) const = 0;

  // Reasonable chain start when the caller does not supply one.
  virtual Vector initial_position() const { return Vector::Zero(dim()); }
};

}  // namespace lmc
