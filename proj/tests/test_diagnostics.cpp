#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lmc/diagnostics.hpp"
#include "lmc/errors.hpp"
#include "lmc/rng.hpp"

using namespace lmc;

namespace {

Vector ar1_series(int b, double rho, std::uint64_t seed) {
  Rng rng(seed);
  Vector x(b);
  x[0] = rng.normal();
  const double scale = std::sqrt(1.0 - rho * rho);
  for (int t = 1; t < b; ++t) x[t] = rho * x[t - 1] + scale * rng.normal();
  return x;
}

// plain-loop reimplementation of the initial-monotone rule, used as the
// cross-check oracle on short series
double ess_brute(const Vector& series) {
  const int b = static_cast<int>(series.size());
  Vector gamma(b);
  const Vector c = series.array() - series.mean();
  for (int k = 0; k < b; ++k) {
    double s = 0.0;
    for (int t = 0; t + k < b; ++t) s += c[t] * c[t + k];
    gamma[k] = s / b;
  }
  double acc = 0.0, prev = std::numeric_limits<double>::infinity();
  for (int m = 0; 2 * m + 1 < b; ++m) {
    double pair = gamma[2 * m] + gamma[2 * m + 1];
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    acc += pair;
    prev = pair;
  }
  const double tau = -1.0 + 2.0 * acc / gamma[0];
  if (tau <= 0.0) return b;
  return std::clamp(b / tau, 1.0, static_cast<double>(b));
}

}  // namespace

TEST_CASE("ar(1) chains hit the analytic effective sample size") {
  const int b = 100000;
  int stream = 0;
  for (double rho : {0.0, 0.5, 0.9}) {
    const Vector x = ar1_series(b, rho, 1000 + static_cast<std::uint64_t>(stream++));
    const double truth = b * (1.0 - rho) / (1.0 + rho);
    const double est = ess_initial_monotone(x);
    CHECK(std::abs(est - truth) <= 0.10 * truth);
  }
}

TEST_CASE("ar(1) autocorrelation matches rho^k") {
  const int b = 100000;  // long enough to take the transform path
  const double rho = 0.9;
  const Vector x = ar1_series(b, rho, 77);
  const Vector gamma = autocovariance(x, 10);
  for (int k = 1; k <= 10; ++k)
    CHECK(std::abs(gamma[k] / gamma[0] - std::pow(rho, k)) < 0.02);
}

TEST_CASE("alternating series is maximally anticorrelated and clamps to b") {
  const int b = 5000;
  Vector x(b);
  for (int t = 0; t < b; ++t) x[t] = (t % 2 == 0) ? 1.0 : -1.0;
  const Vector gamma = autocovariance(x, 1);
  CHECK(std::abs(gamma[1] / gamma[0] + 1.0) < 10.0 / b);
  CHECK(ess_initial_monotone(x) == static_cast<double>(b));
}

TEST_CASE("independent draws give ess near b") {
  const int b = 100000;
  const Vector x = ar1_series(b, 0.0, 3);
  const double est = ess_initial_monotone(x);
  CHECK(est >= 0.9 * b);
  CHECK(est <= static_cast<double>(b));
}

TEST_CASE("ess is invariant under affine maps") {
  const Vector x = ar1_series(20000, 0.6, 12);
  const double base = ess_initial_monotone(x);
  const Vector y = 3.5 * x.array() - 100.0;
  CHECK(std::abs(ess_initial_monotone(y) - base) < 1e-10 * base);
}

TEST_CASE("direct and transform autocovariances agree") {
  for (int b : {64, 4096, 10000}) {
    const Vector x = ar1_series(b, 0.7, static_cast<std::uint64_t>(b));
    const Vector centered = x.array() - x.mean();
    const int max_lag = std::min(b - 1, 200);
    const Vector direct = detail::autocov_direct(centered, max_lag);
    const Vector fft = detail::autocov_fft(centered, max_lag);
    CHECK((direct - fft).cwiseAbs().maxCoeff() < 1e-8);
  }
  // public entry point past the switchover, spot-checked against a plain loop
  const int b = 20000;
  const Vector x = ar1_series(b, 0.5, 9);
  const Vector gamma = autocovariance(x, 5);
  const Vector c = x.array() - x.mean();
  for (int k = 0; k <= 5; ++k) {
    double s = 0.0;
    for (int t = 0; t + k < b; ++t) s += c[t] * c[t + k];
    CHECK(std::abs(gamma[k] - s / b) < 1e-8);
  }
}

TEST_CASE("short-series truncation matches a brute-force scan") {
  for (int b : {8, 17, 33, 64}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Vector x = ar1_series(b, 0.4, 500 + seed);
      CHECK(ess_initial_monotone(x) == doctest::Approx(ess_brute(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate inputs throw") {
  CHECK_THROWS_AS(autocovariance(Vector::Ones(1), 0), DegenerateSeries);
  CHECK_THROWS_AS(autocovariance(Vector::Ones(10), 10), DegenerateSeries);
  CHECK_THROWS_AS(autocovariance(Vector::Ones(10), -1), DegenerateSeries);
  CHECK_THROWS_AS(ess_initial_monotone(Vector::Constant(100, 3.14)), DegenerateSeries);
}

TEST_CASE("summarize reports order statistics and time normalization") {
  const int b = 5000;
  Matrix samples(b, 3);
  samples.col(0) = ar1_series(b, 0.0, 21);
  samples.col(1) = ar1_series(b, 0.5, 22);
  samples.col(2) = ar1_series(b, 0.9, 23);

  const EssReport r = summarize(samples, 2.0);
  REQUIRE(r.per_dimension.size() == 3);
  CHECK(r.min <= r.median);
  CHECK(r.median <= r.max);
  CHECK(r.min == r.per_dimension.minCoeff());
  CHECK(r.max == r.per_dimension.maxCoeff());
  CHECK(r.min_per_second == r.min / 2.0);
  // ordering follows the autocorrelation strengths
  CHECK(r.per_dimension[2] < r.per_dimension[1]);
  CHECK(r.per_dimension[1] < r.per_dimension[0]);

  const EssReport halved = summarize(samples, 4.0);
  CHECK(halved.min_per_second == r.min_per_second / 2.0);

  // even column count: median averages the middle two
  Matrix four(b, 4);
  four.col(0) = samples.col(0);
  four.col(1) = samples.col(1);
  four.col(2) = samples.col(2);
  four.col(3) = ar1_series(b, 0.7, 24);
  const EssReport r4 = summarize(four, 0.0);
  Vector sorted = r4.per_dimension;
  std::sort(sorted.begin(), sorted.end());
  CHECK(r4.median == doctest::Approx(0.5 * (sorted[1] + sorted[2])).epsilon(1e-14));
  CHECK(std::isnan(r4.min_per_second));

  // single kept draw degrades to one effective sample per dimension
  const EssReport one = summarize(Matrix::Random(1, 2), 1.0);
  CHECK(one.min == 1.0);
  CHECK(one.max == 1.0);
}
