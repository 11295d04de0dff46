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

#ifndef NETANOMALY_TENSOR_HPP_
#define NETANOMALY_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace netanomaly {

// Row-major 2-D array of doubles. The single numeric currency of the neural
// modules.
class DenseArray {
 public:
  DenseArray() = default;
  DenseArray(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseArray(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseArray(std::initializer_list<std::initializer_list<double>> rows);

  static DenseArray identity(std::size_t n);
  static DenseArray row_vector(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::string shape_string() const;

  bool operator==(const DenseArray&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Caller-owned accumulator of analytic floating-point operation counts.
struct FlopCounter {
  std::uint64_t flops = 0;
};

// a * b. Adds 2*a.rows*a.cols*b.cols to `counter` when one is supplied.
DenseArray matmul(const DenseArray& a, const DenseArray& b,
                  FlopCounter* counter = nullptr);
// a * b^T without materializing the transpose.
DenseArray matmul_transposed(const DenseArray& a, const DenseArray& b,
                             FlopCounter* counter = nullptr);
// a^T * b without materializing the transpose.
DenseArray transposed_matmul(const DenseArray& a, const DenseArray& b,
                             FlopCounter* counter = nullptr);

DenseArray transpose(const DenseArray& a);
DenseArray add(const DenseArray& a, const DenseArray& b);
DenseArray subtract(const DenseArray& a, const DenseArray& b);
DenseArray hadamard(const DenseArray& a, const DenseArray& b);
DenseArray scale(const DenseArray& a, double factor);
// Adds the 1 x cols row vector `bias` to every row of `a`.
DenseArray add_row_broadcast(const DenseArray& a, const DenseArray& bias);
// 1 x cols array of column sums.
DenseArray column_sums(const DenseArray& a);
// 1 x cols array of column means.
DenseArray column_means(const DenseArray& a);

// Row-wise softmax with per-row max subtraction.
DenseArray softmax_rows(const DenseArray& a);

// Rows [begin, begin+count) / columns [begin, begin+count) as a copy.
DenseArray slice_rows(const DenseArray& a, std::size_t begin, std::size_t count);
DenseArray slice_cols(const DenseArray& a, std::size_t begin, std::size_t count);
// Writes `block` into `dst` starting at column `begin`.
void assign_cols(DenseArray& dst, const DenseArray& block, std::size_t begin);

bool all_finite(const DenseArray& a);

// Central-difference gradient of the scalar function `f` at `x`.
// Throws DomainError if `f` yields a non-finite value.
DenseArray finite_diff_grad(const std::function<double(const DenseArray&)>& f,
                            const DenseArray& x, double eps = 1e-5);

// Largest entry-wise |a-b| / max(|a|, |b|, floor). Shapes must agree.
double max_relative_error(const DenseArray& analytic,
                          const DenseArray& numeric, double floor = 1e-6);

}  // namespace netanomaly

#endif  // NETANOMALY_TENSOR_HPP_
