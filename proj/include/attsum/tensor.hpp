#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace attsum {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  static Matrix identity(std::size_t n);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace tensor {

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> v);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Linear part of one convolution window: W x with W of shape l x hk.
Vector affine_window(const Matrix& W, std::span<const double> x);

// W^T y
Vector transpose_times(const Matrix& W, std::span<const double> y);

Vector tanh_map(std::span<const double> v);

// Logistic function, evaluated on the branch that never overflows exp().
double sigmoid(double x);

struct MaxPool {
  Vector values;
  std::vector<std::size_t> argmax;
};

// Row-wise maximum over the columns of an l x T feature map. Ties resolve to
// the lowest column index.
MaxPool max_over_time(const Matrix& feature_map);

// u^T M v
double bilinear(std::span<const double> u, const Matrix& M, std::span<const double> v);

inline constexpr double kCosineNormFloor = 1e-12;

// Cosine similarity; 0 when either norm is below kCosineNormFloor.
double cosine(std::span<const double> u, std::span<const double> v);

// Gradients of cosine(u, v) with respect to u and v, accumulated with weight
// `scale` into du and dv. No-op under the zero-norm convention.
void cosine_backward(std::span<const double> u, std::span<const double> v, double scale,
                     std::span<double> du, std::span<double> dv);

// M += alpha * u v^T
void add_outer(double alpha, std::span<const double> u, std::span<const double> v, Matrix& M);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::string worst_parameter;
  bool passed = true;
};

// Returns long double so a caller can evaluate the loss in extended precision;
// the differences are then formed without rounding back to double.
using LossFn = std::function<long double(std::span<const double>)>;
using CoordinateName = std::function<std::string(std::size_t)>;

// Compares `analytic` against central differences of loss_fn around params,
// coordinate by coordinate. Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const LossFn& loss_fn, std::span<const double> params,
                           std::span<const double> analytic, double epsilon, double threshold,
                           const CoordinateName& name = {});

}  // namespace tensor
}  // namespace attsum
