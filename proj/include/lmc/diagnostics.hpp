#pragma once

#include "lmc/types.hpp"

namespace lmc {

struct EssReport {
  Vector per_dimension;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double min_per_second = 0.0;  // min / wall seconds; NaN when no time was supplied
};

// Autocovariances gamma(0..max_lag) of the series, centered at the sample
// mean, each normalized by the full length. Series up to 1e4 points use
// direct summation; longer ones go through an FFT. Throws DegenerateSeries
// for fewer than two points.
Vector autocovariance(const Vector& series, int max_lag);

// Effective sample size by the initial-monotone-sequence rule: sum the
// paired autocovariances while positive, enforcing a running minimum, and
// clamp the result to [1, B]. Throws DegenerateSeries for constant input.
double ess_initial_monotone(const Vector& series);

// Per-dimension ESS of a (draws x dim) sample matrix plus summary order
// statistics. total_seconds <= 0 leaves min_per_second as NaN.
EssReport summarize(const Matrix& samples, double total_seconds);

namespace detail {
Vector autocov_direct(const Vector& centered, int max_lag);
Vector autocov_fft(const Vector& centered, int max_lag);
}  // namespace detail

}  // namespace lmc
