#include "attsum/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "attsum/error.hpp"

namespace attsum {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

namespace tensor {

double dot(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector affine_window(const Matrix& W, std::span<const double> x) {
  require(W.cols() == x.size(), "affine_window: W columns must equal window length");
  Vector out(W.rows(), 0.0);
  for (std::size_t r = 0; r < W.rows(); ++r) {
    const auto row = W.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
    out[r] = s;
  }
  return out;
}

Vector transpose_times(const Matrix& W, std::span<const double> y) {
  require(W.rows() == y.size(), "transpose_times: shape mismatch");
  Vector out(W.cols(), 0.0);
  for (std::size_t r = 0; r < W.rows(); ++r) {
    if (y[r] == 0.0) continue;
    axpy(y[r], W.row(r), out);
  }
  return out;
}

Vector tanh_map(std::span<const double> v) {
  Vector out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::tanh(x); });
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

MaxPool max_over_time(const Matrix& feature_map) {
  require(feature_map.cols() >= 1, "max_over_time: feature map needs at least one column");
  MaxPool out;
  out.values.resize(feature_map.rows());
  out.argmax.resize(feature_map.rows());
  for (std::size_t r = 0; r < feature_map.rows(); ++r) {
    const auto row = feature_map.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = c;
    out.values[r] = row[best];
    out.argmax[r] = best;
  }
  return out;
}

double bilinear(std::span<const double> u, const Matrix& M, std::span<const double> v) {
  require(M.rows() == u.size() && M.cols() == v.size(), "bilinear: shape mismatch");
  double s = 0.0;
  for (std::size_t r = 0; r < M.rows(); ++r) {
    if (u[r] == 0.0) continue;
    s += u[r] * dot(M.row(r), v);
  }
  return s;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "cosine: length mismatch");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu < kCosineNormFloor || nv < kCosineNormFloor) return 0.0;
  const double c = dot(u, v) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

void cosine_backward(std::span<const double> u, std::span<const double> v, double scale,
                     std::span<double> du, std::span<double> dv) {
  require(u.size() == v.size() && du.size() == u.size() && dv.size() == v.size(),
          "cosine_backward: length mismatch");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu < kCosineNormFloor || nv < kCosineNormFloor) return;
  const double inv = 1.0 / (nu * nv);
  const double c = dot(u, v) * inv;
  // d cos / du = v / (|u||v|) - cos * u / |u|^2, symmetric in v.
  const double au = c / (nu * nu);
  const double av = c / (nv * nv);
  for (std::size_t i = 0; i < u.size(); ++i) {
    du[i] += scale * (v[i] * inv - au * u[i]);
    dv[i] += scale * (u[i] * inv - av * v[i]);
  }
}

void add_outer(double alpha, std::span<const double> u, std::span<const double> v, Matrix& M) {
  require(M.rows() == u.size() && M.cols() == v.size(), "add_outer: shape mismatch");
  for (std::size_t r = 0; r < u.size(); ++r) {
    if (u[r] == 0.0) continue;
    axpy(alpha * u[r], v, M.row(r));
  }
}

GradCheckReport grad_check(const LossFn& loss_fn, std::span<const double> params,
                           std::span<const double> analytic, double epsilon, double threshold,
                           const CoordinateName& name) {
  require(params.size() == analytic.size(), "grad_check: gradient length mismatch");
  require(epsilon > 0.0, "grad_check: epsilon must be positive");
  GradCheckReport report;
  std::vector<double> theta(params.begin(), params.end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + epsilon;
    const long double up = loss_fn(theta);
    theta[i] = saved - epsilon;
    const long double down = loss_fn(theta);
    theta[i] = saved;
    // Divide by the step actually representable in theta, not 2 eps.
    const long double step = static_cast<long double>(saved + epsilon) -
                             static_cast<long double>(saved - epsilon);
    const double numeric = static_cast<double>((up - down) / step);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const double rel = std::abs(a - numeric) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
    }
  }
  report.worst_parameter =
      name ? name(report.worst_index) : "theta[" + std::to_string(report.worst_index) + "]";
  report.passed = report.max_rel_error < threshold;
  return report;
}

}  // namespace tensor
}  // namespace attsum
