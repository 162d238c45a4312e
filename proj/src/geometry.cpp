#include "lmc/geometry.hpp"

#include <cmath>

namespace lmc {

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Vector MetricBundle::solve(const Vector& b) const {
  Vector x = chol.triangularView<Eigen::Lower>().solve(b);
  chol.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

std::optional<MetricBundle> build_metric_bundle(const TargetModel& model, const Vector& theta) {
  if (!theta.allFinite()) return std::nullopt;

  MetricBundle b;
  b.theta = theta;
  b.g = symmetrized(model.metric(theta));
  if (!b.g.allFinite()) return std::nullopt;

  Eigen::LLT<Matrix> llt(b.g);
  if (llt.info() != Eigen::Success) return std::nullopt;
  b.chol = llt.matrixL();
  if (!(b.chol.diagonal().array() > 0.0).all()) return std::nullopt;

  b.log_det = 2.0 * b.chol.diagonal().array().log().sum();
  b.g_inv = llt.solve(Matrix::Identity(b.g.rows(), b.g.cols()));
  b.g_inv = symmetrized(b.g_inv);

  b.dg = model.metric_deriv(theta);
  for (auto& slice : b.dg) {
    slice = symmetrized(slice);
    if (!slice.allFinite()) return std::nullopt;
  }
  return b;
}

ChristoffelFirst christoffel_first(const MetricBundle& bundle) {
  const int d = bundle.dim();
  ChristoffelFirst out;
  out.gamma_tilde.resize(d);
  for (int k = 0; k < d; ++k) {
    Matrix t(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        t(i, j) = 0.5 * (bundle.dg[i](k, j) + bundle.dg[j](i, k) - bundle.dg[k](i, j));
    out.gamma_tilde[k] = symmetrized(t);
  }
  return out;
}

ChristoffelSecond christoffel_second(const MetricBundle& bundle) {
  const ChristoffelFirst first = christoffel_first(bundle);
  const int d = bundle.dim();
  ChristoffelSecond out;
  out.gamma.resize(d);
  for (int k = 0; k < d; ++k) {
    Matrix acc = Matrix::Zero(d, d);
    for (int l = 0; l < d; ++l) acc += bundle.g_inv(k, l) * first.gamma_tilde[l];
    out.gamma[k] = symmetrized(acc);
  }
  return out;
}

Vector nu_vector(const MetricBundle& bundle, const Vector& p) {
  const Vector v = bundle.solve(p);
  const int d = bundle.dim();
  Vector nu(d);
  for (int i = 0; i < d; ++i) nu[i] = v.dot(bundle.dg[i] * v);
  return nu;
}

Vector eta_vector(const ChristoffelSecond& gamma, const Vector& v) {
  const int d = static_cast<int>(gamma.gamma.size());
  Vector eta(d);
  for (int k = 0; k < d; ++k) eta[k] = v.dot(gamma.gamma[k] * v);
  return eta;
}

Matrix omega_matrix(const ChristoffelSecond& gamma, const Vector& v) {
  const int d = static_cast<int>(gamma.gamma.size());
  Matrix omega(d, d);
  // row a of Omega is v contracted into the first lower index of Gamma^a;
  // the slices are symmetric, so that is just gamma[a] * v.
  for (int a = 0; a < d; ++a) omega.row(a) = (gamma.gamma[a] * v).transpose();
  return omega;
}

Matrix omega_tilde_matrix(const ChristoffelFirst& gamma_tilde, const Vector& v) {
  const int d = static_cast<int>(gamma_tilde.gamma_tilde.size());
  Matrix out(d, d);
  for (int k = 0; k < d; ++k) out.row(k) = (gamma_tilde.gamma_tilde[k] * v).transpose();
  return out;
}

}  // namespace lmc
