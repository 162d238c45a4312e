#include "lmc/models/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace

// Everything derived from z that the likelihood scan needs. Index layout:
// z = (u_0..u_{K-2}, mu_0..mu_{K-1}, w_0..w_{K-1}).
struct GaussianMixtureModel::Unpacked {
  Vector u, s, mu, w, var;
  Vector log_pi;  // K entries, exact in log space
  Matrix d;       // d(k, j) = d log_pi_k / d u_j, K x (K-1)
  Matrix dd;      // dd(k, j) = d^2 log_pi_k / d u_j^2 (cross terms vanish)
  int k = 0;

  int u_at(int j) const { return j; }
  int mu_at(int j) const { return k - 1 + j; }
  int w_at(int j) const { return 2 * k - 1 + j; }
};

GaussianMixtureModel::GaussianMixtureModel(Vector data, int n_components, Prior prior)
    : data_(std::move(data)), k_(n_components), prior_(prior) {
  if (k_ < 1) throw DimensionMismatch("gmm: need at least one component");
  if (data_.size() < 2) throw DimensionMismatch("gmm: need at least two observations");
  if (prior_.lambda <= 0.0 || prior_.beta <= 0.0 || prior_.ig_shape <= 0.0)
    throw DimensionMismatch("gmm: prior hyperparameters must be positive");
  const double mean = data_.mean();
  const double var = (data_.array() - mean).square().sum() / static_cast<double>(data_.size());
  if (var <= 0.0) throw DimensionMismatch("gmm: data has zero variance");
  mean_loc_ = prior_.mean_loc.value_or(mean);
  ig_scale_ = prior_.ig_scale.value_or(var);
  if (ig_scale_ <= 0.0) throw DimensionMismatch("gmm: inverse-gamma scale must be positive");
}

GaussianMixtureModel::GaussianMixtureModel(Vector data, int n_components)
    : GaussianMixtureModel(std::move(data), n_components, Prior{}) {}

GaussianMixtureModel GaussianMixtureModel::from_dataset(const Dataset& data, int n_components,
                                                        Prior prior) {
  if (data.x.cols() != 1) throw DimensionMismatch("gmm: expected a single observation column");
  return GaussianMixtureModel(data.x.col(0), n_components, prior);
}

GaussianMixtureModel GaussianMixtureModel::from_dataset(const Dataset& data, int n_components) {
  return from_dataset(data, n_components, Prior{});
}

GaussianMixtureModel::Unpacked GaussianMixtureModel::unpack(const Vector& z) const {
  if (z.size() != dim()) throw DimensionMismatch("gmm: parameter vector has wrong length");
  Unpacked q;
  q.k = k_;
  q.u = z.head(k_ - 1);
  q.mu = z.segment(k_ - 1, k_);
  q.w = z.tail(k_);
  q.var = q.w.array().exp();

  q.s.resize(k_ - 1);
  Vector log_s(k_ - 1), log_1ms(k_ - 1);
  for (int j = 0; j < k_ - 1; ++j) {
    q.s[j] = 1.0 / (1.0 + std::exp(-q.u[j]));
    log_s[j] = -softplus(-q.u[j]);
    log_1ms[j] = -softplus(q.u[j]);
  }

  q.log_pi.resize(k_);
  double log_tail = 0.0;  // log prod_{j<k} (1 - s_j)
  for (int k = 0; k < k_ - 1; ++k) {
    q.log_pi[k] = log_s[k] + log_tail;
    log_tail += log_1ms[k];
  }
  q.log_pi[k_ - 1] = log_tail;

  q.d = Matrix::Zero(k_, std::max(k_ - 1, 0));
  q.dd = Matrix::Zero(k_, std::max(k_ - 1, 0));
  for (int k = 0; k < k_; ++k) {
    const int last = std::min(k, k_ - 2);  // active logits for component k
    for (int j = 0; j <= last; ++j) {
      q.d(k, j) = (j == k) ? 1.0 - q.s[j] : -q.s[j];
      q.dd(k, j) = -q.s[j] * (1.0 - q.s[j]);
    }
  }
  return q;
}

// Runs over the data once. For each observation computes the responsibility-
// weighted score vector (and, when asked, the per-observation Hessian of the
// log marginal likelihood) and hands both to the visitor. Returns the total
// log likelihood.
template <typename Visit>
double GaussianMixtureModel::scan_data(const Unpacked& q, bool with_hessian,
                                       Visit&& visit) const {
  const int d = dim();
  const int k = k_;
  double loglik = 0.0;

  Vector a(k), r(k), cap_a(k), cap_b(k);
  Vector score(d);
  Matrix hess;
  if (with_hessian) hess.resize(d, d);

  for (Eigen::Index i = 0; i < data_.size(); ++i) {
    const double x = data_[i];
    for (int c = 0; c < k; ++c) {
      const double diff = x - q.mu[c];
      cap_a[c] = diff / q.var[c];                              // d log N / d mu
      cap_b[c] = -0.5 + diff * diff / (2.0 * q.var[c]);        // d log N / d w
      a[c] = q.log_pi[c] - 0.5 * (kLog2Pi + q.w[c]) - 0.5 * diff * cap_a[c];
    }
    const double amax = a.maxCoeff();
    double norm = 0.0;
    for (int c = 0; c < k; ++c) {
      r[c] = std::exp(a[c] - amax);
      norm += r[c];
    }
    r /= norm;
    loglik += amax + std::log(norm);

    score.setZero();
    for (int c = 0; c < k; ++c) {
      for (int j = 0; j < k - 1; ++j) score[q.u_at(j)] += r[c] * q.d(c, j);
      score[q.mu_at(c)] = r[c] * cap_a[c];
      score[q.w_at(c)] = r[c] * cap_b[c];
    }

    if (!with_hessian) {
      visit(score, hess);
      continue;
    }

    hess.setZero();
    for (int c = 0; c < k; ++c) {
      // curvature of a_ic plus the responsibility outer-product term
      const int mc = q.mu_at(c), wc = q.w_at(c);
      hess(mc, mc) += r[c] * (-1.0 / q.var[c]);
      hess(mc, wc) += r[c] * (-cap_a[c]);
      hess(wc, mc) += r[c] * (-cap_a[c]);
      hess(wc, wc) += r[c] * (-(cap_b[c] + 0.5));
      for (int j = 0; j < k - 1; ++j) hess(q.u_at(j), q.u_at(j)) += r[c] * q.dd(c, j);

      // b_ic b_ic^T restricted to the coordinates a_ic touches
      const int nu = k - 1;
      for (int j0 = 0; j0 < nu; ++j0) {
        if (q.d(c, j0) == 0.0) continue;
        const double bj0 = q.d(c, j0);
        for (int j1 = 0; j1 < nu; ++j1) hess(j0, j1) += r[c] * bj0 * q.d(c, j1);
        hess(j0, mc) += r[c] * bj0 * cap_a[c];
        hess(mc, j0) += r[c] * bj0 * cap_a[c];
        hess(j0, wc) += r[c] * bj0 * cap_b[c];
        hess(wc, j0) += r[c] * bj0 * cap_b[c];
      }
      hess(mc, mc) += r[c] * cap_a[c] * cap_a[c];
      hess(mc, wc) += r[c] * cap_a[c] * cap_b[c];
      hess(wc, mc) += r[c] * cap_a[c] * cap_b[c];
      hess(wc, wc) += r[c] * cap_b[c] * cap_b[c];
    }
    hess.noalias() -= score * score.transpose();
    visit(score, hess);
  }
  return loglik;
}

double GaussianMixtureModel::log_likelihood(const Vector& z) const {
  const Unpacked q = unpack(z);
  return scan_data(q, false, [](const Vector&, const Matrix&) {});
}

Matrix GaussianMixtureModel::score_matrix(const Vector& z) const {
  const Unpacked q = unpack(z);
  Matrix s(data_.size(), dim());
  Eigen::Index row = 0;
  scan_data(q, false, [&](const Vector& score, const Matrix&) { s.row(row++) = score; });
  return s;
}

double GaussianMixtureModel::log_density(const Vector& z) const {
  const Unpacked q = unpack(z);
  double out = scan_data(q, false, [](const Vector&, const Matrix&) {});

  // Dirichlet(lambda) on the weights
  out += (prior_.lambda - 1.0) * q.log_pi.sum();
  // N(mean_loc, var_c / beta) on each mean, inverse-gamma on each variance
  for (int c = 0; c < k_; ++c) {
    const double dm = q.mu[c] - mean_loc_;
    out += 0.5 * (std::log(prior_.beta) - kLog2Pi) - 0.5 * q.w[c] -
           prior_.beta * dm * dm / (2.0 * q.var[c]);
    out += -(prior_.ig_shape + 1.0) * q.w[c] - ig_scale_ / q.var[c];
  }
  // log-Jacobians: stick-breaking then the exp map for the variances
  double log_tail = 0.0;
  for (int j = 0; j < k_ - 1; ++j) {
    out += log_tail - softplus(-q.u[j]) - softplus(q.u[j]);
    log_tail += -softplus(q.u[j]);
  }
  out += q.w.sum();
  return out;
}

Vector GaussianMixtureModel::grad_log_density(const Vector& z) const {
  const Unpacked q = unpack(z);
  Vector grad = Vector::Zero(dim());
  scan_data(q, false, [&](const Vector& score, const Matrix&) { grad += score; });

  for (int j = 0; j < k_ - 1; ++j) {
    double du = 0.0;
    for (int c = 0; c < k_; ++c) du += (prior_.lambda - 1.0) * q.d(c, j);
    // stick-breaking Jacobian: log s_j + log(1-s_j) + the tails of later sticks
    du += (1.0 - 2.0 * q.s[j]) - q.s[j] * static_cast<double>(k_ - 2 - j);
    grad[q.u_at(j)] += du;
  }
  for (int c = 0; c < k_; ++c) {
    const double dm = q.mu[c] - mean_loc_;
    grad[q.mu_at(c)] += -prior_.beta * dm / q.var[c];
    grad[q.w_at(c)] += -0.5 + prior_.beta * dm * dm / (2.0 * q.var[c]);
    grad[q.w_at(c)] += -(prior_.ig_shape + 1.0) + ig_scale_ / q.var[c];
    grad[q.w_at(c)] += 1.0;  // exp-map Jacobian
  }
  return grad;
}

Matrix GaussianMixtureModel::metric(const Vector& z) const {
  const Unpacked q = unpack(z);
  const int d = dim();
  Matrix g = Matrix::Zero(d, d);
  Vector ssum = Vector::Zero(d);
  scan_data(q, false, [&](const Vector& score, const Matrix&) {
    g.noalias() += score * score.transpose();
    ssum += score;
  });
  g.noalias() -= ssum * ssum.transpose() / static_cast<double>(data_.size());
  g.diagonal().array() += kMetricReg * g.diagonal().mean();
  return g;
}

Tensor3 GaussianMixtureModel::metric_deriv(const Vector& z) const {
  const Unpacked q = unpack(z);
  const int d = dim();
  const double n = static_cast<double>(data_.size());

  Tensor3 t(d, Matrix::Zero(d, d));  // t[e] = sum_i hess_i.col(e) score_i^T
  Matrix hsum = Matrix::Zero(d, d);
  Vector ssum = Vector::Zero(d);
  scan_data(q, true, [&](const Vector& score, const Matrix& hess) {
    for (int e = 0; e < d; ++e) t[e].noalias() += hess.col(e) * score.transpose();
    hsum += hess;
    ssum += score;
  });

  Tensor3 out(d);
  for (int e = 0; e < d; ++e) {
    Matrix slice = t[e] + t[e].transpose();
    slice.noalias() -= (hsum.col(e) * ssum.transpose() + ssum * hsum.col(e).transpose()) / n;
    slice.diagonal().array() += kMetricReg * slice.trace() / static_cast<double>(d);
    out[e] = std::move(slice);
  }
  return out;
}

GaussianMixtureModel::Params GaussianMixtureModel::constrain(const Vector& z) const {
  const Unpacked q = unpack(z);
  Params p;
  p.pi = q.log_pi.array().exp();
  p.mu = q.mu;
  p.var = q.var;
  return p;
}

Vector GaussianMixtureModel::unconstrain(const Params& p) const {
  if (p.pi.size() != k_ || p.mu.size() != k_ || p.var.size() != k_)
    throw DimensionMismatch("gmm: constrained parameter sizes must all equal K");
  Vector z(dim());
  double tail = 1.0;
  for (int j = 0; j < k_ - 1; ++j) {
    const double s = p.pi[j] / tail;
    if (!(s > 0.0 && s < 1.0)) throw DimensionMismatch("gmm: weights not interior to the simplex");
    z[j] = std::log(s) - std::log1p(-s);
    tail -= p.pi[j];
  }
  for (int c = 0; c < k_; ++c) {
    if (!(p.var[c] > 0.0)) throw DimensionMismatch("gmm: variances must be positive");
    z[k_ - 1 + c] = p.mu[c];
    z[2 * k_ - 1 + c] = std::log(p.var[c]);
  }
  return z;
}

Vector GaussianMixtureModel::initial_position() const {
  // quantile-spread means, equal weights, pooled variance
  Vector sorted = data_;
  std::sort(sorted.begin(), sorted.end());
  const double mean = data_.mean();
  const double var = (data_.array() - mean).square().sum() / static_cast<double>(data_.size());
  Vector z = Vector::Zero(dim());
  for (int c = 0; c < k_; ++c) {
    const double p = (c + 1.0) / (k_ + 1.0);
    const Eigen::Index at = std::min<Eigen::Index>(
        data_.size() - 1, static_cast<Eigen::Index>(p * static_cast<double>(data_.size())));
    z[k_ - 1 + c] = sorted[at];
    z[2 * k_ - 1 + c] = std::log(var);
  }
  return z;
}

}  // namespace lmc
