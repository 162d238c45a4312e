#include "lmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "lmc/errors.hpp"

namespace lmc {

namespace detail {

Vector autocov_direct(const Vector& centered, int max_lag) {
  const Eigen::Index b = centered.size();
  Vector gamma(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k)
    gamma[k] = centered.head(b - k).dot(centered.tail(b - k)) / static_cast<double>(b);
  return gamma;
}

Vector autocov_fft(const Vector& centered, int max_lag) {
  const Eigen::Index b = centered.size();
  Eigen::Index n = 1;
  while (n < 2 * b) n <<= 1;

  std::vector<double> padded(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < b; ++i) padded[static_cast<std::size_t>(i)] = centered[i];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, padded);
  for (auto& z : freq) z = std::norm(z);
  std::vector<double> acorr;
  fft.inv(acorr, freq);

  Vector gamma(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) gamma[k] = acorr[static_cast<std::size_t>(k)] / static_cast<double>(b);
  return gamma;
}

}  // namespace detail

Vector autocovariance(const Vector& series, int max_lag) {
  const Eigen::Index b = series.size();
  if (b < 2) throw DegenerateSeries("autocovariance needs at least two points");
  if (max_lag < 0 || max_lag >= b)
    throw DegenerateSeries("autocovariance lag out of range");
  const Vector centered = series.array() - series.mean();
  return b <= 10000 ? detail::autocov_direct(centered, max_lag)
                    : detail::autocov_fft(centered, max_lag);
}

double ess_initial_monotone(const Vector& series) {
  const Eigen::Index b = series.size();
  const Vector gamma = autocovariance(series, static_cast<int>(b - 1));
  const double var = gamma[0];
  if (!(var > 0.0)) throw DegenerateSeries("constant series has no effective sample size");

  // paired sums, kept positive and nonincreasing
  double acc = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; 2 * m + 1 < b; ++m) {
    double pair = gamma[2 * m] + gamma[2 * m + 1];
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    acc += pair;
    prev = pair;
  }
  const double tau = -1.0 + 2.0 * acc / var;
  const double n = static_cast<double>(b);
  if (tau <= 0.0) return n;
  return std::clamp(n / tau, 1.0, n);
}

EssReport summarize(const Matrix& samples, double total_seconds) {
  const Eigen::Index b = samples.rows();
  const Eigen::Index d = samples.cols();
  if (b < 1 || d < 1) throw DegenerateSeries("summarize needs a nonempty sample matrix");

  EssReport r;
  r.per_dimension.resize(d);
  if (b == 1) {
    r.per_dimension.setOnes();
  } else {
    for (Eigen::Index j = 0; j < d; ++j) r.per_dimension[j] = ess_initial_monotone(samples.col(j));
  }

  std::vector<double> sorted(r.per_dimension.begin(), r.per_dimension.end());
  std::sort(sorted.begin(), sorted.end());
  r.min = sorted.front();
  r.max = sorted.back();
  const std::size_t mid = sorted.size() / 2;
  r.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  r.min_per_second = total_seconds > 0.0 ? r.min / total_seconds
                                         : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace lmc
