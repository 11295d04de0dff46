/*
 * Copyright 2026 The netanomaly Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "netanomaly/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netanomaly/error.hpp"

namespace netanomaly {
namespace {

void require_same_shape(const DenseArray& a, const DenseArray& b,
                        const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shapes " + a.shape_string() +
                     " and " + b.shape_string() + " differ");
  }
}

}  // namespace

DenseArray::DenseArray(std::size_t rows, std::size_t cols,
                       std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("DenseArray: " + std::to_string(data_.size()) +
                     " values for shape " + shape_string());
  }
}

DenseArray::DenseArray(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("DenseArray: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseArray DenseArray::identity(std::size_t n) {
  DenseArray out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

DenseArray DenseArray::row_vector(std::span<const double> values) {
  return DenseArray(1, values.size(),
                    std::vector<double>(values.begin(), values.end()));
}

std::string DenseArray::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

DenseArray matmul(const DenseArray& a, const DenseArray& b,
                  FlopCounter* counter) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.shape_string() + " x " + b.shape_string());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  DenseArray out(n, m);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  if (counter) counter->flops += 2ULL * n * k * m;
  return out;
}

DenseArray matmul_transposed(const DenseArray& a, const DenseArray& b,
                             FlopCounter* counter) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_transposed: " + a.shape_string() + " x " +
                     b.shape_string() + "^T");
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  DenseArray out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ar = a.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const auto br = b.row(j);
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      out(i, j) = s;
    }
  }
  if (counter) counter->flops += 2ULL * n * k * m;
  return out;
}

DenseArray transposed_matmul(const DenseArray& a, const DenseArray& b,
                             FlopCounter* counter) {
  if (a.rows() != b.rows()) {
    throw ShapeError("transposed_matmul: " + a.shape_string() + "^T x " +
                     b.shape_string());
  }
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
  DenseArray out(n, m);
  for (std::size_t p = 0; p < k; ++p) {
    const auto ar = a.row(p);
    const auto br = b.row(p);
    for (std::size_t i = 0; i < n; ++i) {
      const double av = ar[i];
      if (av == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * br[j];
    }
  }
  if (counter) counter->flops += 2ULL * n * k * m;
  return out;
}

DenseArray transpose(const DenseArray& a) {
  DenseArray out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

DenseArray add(const DenseArray& a, const DenseArray& b) {
  require_same_shape(a, b, "add");
  DenseArray out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

DenseArray subtract(const DenseArray& a, const DenseArray& b) {
  require_same_shape(a, b, "subtract");
  DenseArray out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

DenseArray hadamard(const DenseArray& a, const DenseArray& b) {
  require_same_shape(a, b, "hadamard");
  DenseArray out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

DenseArray scale(const DenseArray& a, double factor) {
  DenseArray out = a;
  for (double& v : out.data()) v *= factor;
  return out;
}

DenseArray add_row_broadcast(const DenseArray& a, const DenseArray& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw ShapeError("add_row_broadcast: " + a.shape_string() + " + " +
                     bias.shape_string());
  }
  DenseArray out = a;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias(0, j);
  }
  return out;
}

DenseArray column_sums(const DenseArray& a) {
  DenseArray out(1, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out(0, j) += r[j];
  }
  return out;
}

DenseArray column_means(const DenseArray& a) {
  if (a.rows() == 0) return DenseArray(1, a.cols());
  return scale(column_sums(a), 1.0 / static_cast<double>(a.rows()));
}

DenseArray softmax_rows(const DenseArray& a) {
  DenseArray out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto in = a.row(i);
    auto o = out.row(i);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (double& v : o) v /= total;
  }
  return out;
}

DenseArray slice_rows(const DenseArray& a, std::size_t begin,
                      std::size_t count) {
  if (begin + count > a.rows()) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") of " +
                     a.shape_string());
  }
  return DenseArray(
      count, a.cols(),
      std::vector<double>(a.data().begin() + begin * a.cols(),
                          a.data().begin() + (begin + count) * a.cols()));
}

DenseArray slice_cols(const DenseArray& a, std::size_t begin,
                      std::size_t count) {
  if (begin + count > a.cols()) {
    throw ShapeError("slice_cols: cols [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") of " +
                     a.shape_string());
  }
  DenseArray out(a.rows(), count);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = a(i, begin + j);
  return out;
}

void assign_cols(DenseArray& dst, const DenseArray& block, std::size_t begin) {
  if (block.rows() != dst.rows() || begin + block.cols() > dst.cols()) {
    throw ShapeError("assign_cols: " + block.shape_string() + " into " +
                     dst.shape_string() + " at column " +
                     std::to_string(begin));
  }
  for (std::size_t i = 0; i < dst.rows(); ++i)
    for (std::size_t j = 0; j < block.cols(); ++j)
      dst(i, begin + j) = block(i, j);
}

bool all_finite(const DenseArray& a) {
  return std::all_of(a.data().begin(), a.data().end(),
                     [](double v) { return std::isfinite(v); });
}

DenseArray finite_diff_grad(const std::function<double(const DenseArray&)>& f,
                            const DenseArray& x, double eps) {
  if (!(eps > 0.0)) throw InputError("finite_diff_grad: eps must be positive");
  DenseArray grad(x.rows(), x.cols());
  DenseArray probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double original = probe.data()[i];
    probe.data()[i] = original + eps;
    const double up = f(probe);
    probe.data()[i] = original - eps;
    const double down = f(probe);
    probe.data()[i] = original;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw DomainError("finite_diff_grad: non-finite function value at entry " +
                        std::to_string(i));
    }
    grad.data()[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

double max_relative_error(const DenseArray& analytic, const DenseArray& numeric,
                          double floor) {
  require_same_shape(analytic, numeric, "max_relative_error");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i], n = numeric.data()[i];
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

}  // namespace netanomaly
