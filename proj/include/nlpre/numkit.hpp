// Copyright 2026 The nlpre Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small dense linear algebra and fixed-step integration.
//
// Everything here works on matrices of size at most 8, which covers every
// regression in this library (the largest extended regressor is 5x5).

#ifndef NLPRE_NUMKIT_HPP_
#define NLPRE_NUMKIT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlpre/errors.hpp"

namespace nlpre {

using Vec = std::vector<double>;

inline constexpr std::size_t kMaxDenseSize = 8;

/// Dense row-major matrix of doubles.
class Mat {
 public:
  Mat() = default;

  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (!std::isfinite(fill)) throw ArgumentError("Mat: non-finite fill value");
  }

  Mat(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("Mat: " + std::to_string(data_.size()) + " entries for a " +
                           std::to_string(rows_) + "x" + std::to_string(cols_) + " matrix");
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw ArgumentError("Mat: non-finite entry");
    }
  }

  Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("Mat: ragged initializer");
      for (double v : r) {
        if (!std::isfinite(v)) throw ArgumentError("Mat: non-finite entry");
        data_.push_back(v);
      }
    }
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Mat diagonal(std::span<const double> d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Vec row(std::size_t i) const {
    return Vec(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
               data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Vec operator*(const Mat& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matvec: " + std::to_string(a.cols()) + " columns, vector of " +
                         std::to_string(x.size()));
  }
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline Vec operator*(const Mat& a, const Vec& x) { return a * std::span<const double>(x); }

inline Mat operator*(double s, Mat a) {
  for (double& v : a.data()) v *= s;
  return a;
}

inline Mat operator+(Mat a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("matrix add: shape");
  for (std::size_t k = 0; k < a.data().size(); ++k) a.data()[k] += b.data()[k];
  return a;
}

inline Mat operator-(Mat a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("matrix sub: shape");
  for (std::size_t k = 0; k < a.data().size(); ++k) a.data()[k] -= b.data()[k];
  return a;
}

/// Induced infinity norm (maximum absolute row sum).
inline double norm_inf(const Mat& a) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

inline double norm_inf(std::span<const double> x) {
  double best = 0.0;
  for (double v : x) best = std::max(best, std::abs(v));
  return best;
}

inline double max_abs_entry(const Mat& a) { return norm_inf(a.data()); }

inline Vec axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
  Vec out(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
  return out;
}

namespace detail {

inline void require_square(const Mat& a, const char* op) {
  if (!a.square()) {
    throw DimensionError(std::string(op) + ": matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
  }
  if (a.rows() > kMaxDenseSize) {
    throw ArgumentError(std::string(op) + ": size " + std::to_string(a.rows()) +
                        " exceeds supported maximum 8");
  }
}

// Laplace expansion along the first row; `a` is n x n row-major with row
// stride n. Used for n <= 4, where it is exact in the sense of performing the
// classical signed sum of products.
inline double cofactor_det(const double* a, std::size_t n) {
  switch (n) {
    case 0:
      return 1.0;
    case 1:
      return a[0];
    case 2:
      return a[0] * a[3] - a[1] * a[2];
    default:
      break;
  }
  std::array<double, kMaxDenseSize * kMaxDenseSize> minor{};
  double sum = 0.0;
  double sign = 1.0;
  for (std::size_t j = 0; j < n; ++j, sign = -sign) {
    const double pivot = a[j];
    if (pivot == 0.0) continue;
    std::size_t k = 0;
    for (std::size_t r = 1; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) minor[k++] = a[r * n + c];
    sum += sign * pivot * cofactor_det(minor.data(), n - 1);
  }
  return sum;
}

// LU with partial pivoting on a scratch copy.
inline double lu_det(const double* a, std::size_t n) {
  std::array<double, kMaxDenseSize * kMaxDenseSize> lu{};
  std::copy(a, a + n * n, lu.begin());
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu[k * n + k]);
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(lu[r * n + k]) > best) {
        best = std::abs(lu[r * n + k]);
        piv = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu[k * n + c], lu[piv * n + c]);
      det = -det;
    }
    const double d = lu[k * n + k];
    det *= d;
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = lu[r * n + k] / d;
      if (f == 0.0) continue;
      for (std::size_t c = k + 1; c < n; ++c) lu[r * n + c] -= f * lu[k * n + c];
    }
  }
  return det;
}

inline double raw_det(const double* a, std::size_t n) {
  return n <= 4 ? cofactor_det(a, n) : lu_det(a, n);
}

}  // namespace detail

/// Determinant: cofactor expansion up to 4x4, LU with partial pivoting for 5..8.
inline double det(const Mat& a) {
  detail::require_square(a, "det");
  return detail::raw_det(a.data().data(), a.rows());
}

/// Transpose of the cofactor matrix. adjugate(A) * A == det(A) * I holds for
/// singular A as well, which is why the mixing steps use it instead of an
/// inverse.
inline Mat adjugate(const Mat& a) {
  detail::require_square(a, "adjugate");
  const std::size_t n = a.rows();
  Mat adj(n, n);
  if (n == 0) return adj;
  if (n == 1) {
    adj(0, 0) = 1.0;
    return adj;
  }
  std::array<double, kMaxDenseSize * kMaxDenseSize> minor{};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t k = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == i) continue;
        for (std::size_t c = 0; c < n; ++c)
          if (c != j) minor[k++] = a(r, c);
      }
      const double cof = detail::raw_det(minor.data(), n - 1);
      adj(j, i) = ((i + j) % 2 == 0) ? cof : -cof;
    }
  }
  return adj;
}

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
/// Only the upper triangle is read.
inline Vec symmetric_eigenvalues(const Mat& s) {
  detail::require_square(s, "symmetric_eigenvalues");
  const std::size_t n = s.rows();
  Mat a = s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale += a(i, i) * a(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off == 0.0 || off <= 1e-30 * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  Vec ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Smallest singular value, via the smallest eigenvalue of A^T A.
inline double min_singular_value(const Mat& a) {
  const Vec ev = symmetric_eigenvalues(transpose(a) * a);
  return ev.empty() ? 0.0 : std::sqrt(std::max(0.0, ev.front()));
}

inline Mat symmetrized(const Mat& a) { return 0.5 * (a + transpose(a)); }

/// Ordered samples on a uniform grid. Times must be strictly increasing and
/// spaced by a constant step (checked to 1e-9 relative).
template <class Value>
class TimeSeries {
 public:
  struct Sample {
    double t;
    Value value;
  };

  void push(double t, Value value) {
    if (!samples_.empty()) {
      const double last = samples_.back().t;
      if (!(t > last)) throw ArgumentError("TimeSeries: times must be strictly increasing");
      const double dt = t - last;
      if (samples_.size() == 1) {
        step_ = dt;
      } else if (std::abs(dt - step_) > 1e-9 * std::max(1.0, step_)) {
        throw ArgumentError("TimeSeries: non-uniform step");
      }
    }
    samples_.push_back({t, std::move(value)});
  }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double step() const { return step_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const Sample& front() const { return samples_.front(); }
  const Sample& back() const { return samples_.back(); }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

 private:
  std::vector<Sample> samples_;
  double step_ = 0.0;
};

using RhsFn = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;
using ProjectFn = std::function<void(double t, std::span<double> x)>;
using StepObserver = std::function<void(std::size_t step, double t, std::span<const double> x)>;

struct OdeProblem {
  std::size_t dimension = 0;
  RhsFn rhs;
  double t0 = 0.0;
  Vec x0;
  // Optional projection applied after every accepted step.
  ProjectFn project;
};

/// Classical fixed-step RK4 from problem.t0 to t_end using
/// N = round((t_end - t0) / h) steps; t_k = t0 + k h exactly.
///
/// The observer sees the initial state (step 0) and every accepted step.
/// Every `record_stride`-th state is returned; 0 disables recording.
inline TimeSeries<Vec> integrate(const OdeProblem& problem, double t_end, double h,
                                 const StepObserver& observer = {},
                                 std::size_t record_stride = 1) {
  if (!(h > 0.0)) throw ArgumentError("integrate: step must be positive");
  if (!(t_end > problem.t0)) throw ArgumentError("integrate: t_end must exceed t0");
  if (problem.x0.size() != problem.dimension) {
    throw DimensionError("integrate: x0 has " + std::to_string(problem.x0.size()) +
                         " components, dimension is " + std::to_string(problem.dimension));
  }
  const std::size_t n = problem.dimension;
  const auto steps = static_cast<std::size_t>(std::llround((t_end - problem.t0) / h));
  if (steps == 0) throw ArgumentError("integrate: horizon shorter than one step");

  TimeSeries<Vec> out;
  Vec x = problem.x0;
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n);

  auto check_finite = [&](double t, std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) {
        throw IntegrationDiverged(t, "integration diverged at t = " + std::to_string(t) +
                                         " (component " + std::to_string(i) + ")");
      }
    }
  };

  check_finite(problem.t0, x);
  if (observer) observer(0, problem.t0, x);
  if (record_stride != 0) out.push(problem.t0, x);

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = problem.t0 + static_cast<double>(k) * h;
    problem.rhs(t, x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    problem.rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    problem.rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    problem.rhs(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    const double t_next = problem.t0 + static_cast<double>(k + 1) * h;
    check_finite(t_next, x);
    if (problem.project) problem.project(t_next, x);
    if (observer) observer(k + 1, t_next, x);
    if (record_stride != 0 && (k + 1) % record_stride == 0) out.push(t_next, x);
  }
  return out;
}

}  // namespace nlpre

#endif  // NLPRE_NUMKIT_HPP_
