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

// Independent reference implementations and random fixtures shared by the
// test binaries. Nothing here calls into the code under test.

#ifndef NETANOMALY_TESTS_SUPPORT_HPP_
#define NETANOMALY_TESTS_SUPPORT_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "netanomaly/random.hpp"
#include "netanomaly/tensor.hpp"

namespace netanomaly::testing {

// Mann-Whitney pair count: wins plus half credit for ties over P*N pairs.
inline double pairwise_auc(const std::vector<double>& scores,
                           const std::vector<int>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

// Textbook triple loop.
inline DenseArray naive_matmul(const DenseArray& a, const DenseArray& b) {
  DenseArray out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

// Jensen-Shannon divergence of two aligned probability vectors, natural log.
inline double js_aligned(const std::vector<double>& p,
                         const std::vector<double>& q) {
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) js += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) js += 0.5 * q[i] * std::log(q[i] / m);
  }
  return js;
}

inline DenseArray random_array(std::size_t rows, std::size_t cols, Rng& rng,
                               double lo = -1.0, double hi = 1.0) {
  DenseArray a(rows, cols);
  for (double& v : a.data()) v = rng.uniform(lo, hi);
  return a;
}

// Random probability vector; some entries forced to zero when `sparse`.
inline std::vector<double> random_simplex(std::size_t n, Rng& rng,
                                          bool sparse) {
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) {
    v = (sparse && rng.uniform() < 0.3) ? 0.0 : rng.uniform(0.01, 1.0);
    total += v;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (double& v : p) v /= total;
  // Push the rounding residue into the largest entry.
  double sum = 0.0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += p[i];
    if (p[i] > p[largest]) largest = i;
  }
  p[largest] += 1.0 - sum;
  return p;
}

inline DenseArray as_row(const std::vector<double>& v) {
  return DenseArray(1, v.size(), v);
}

}  // namespace netanomaly::testing

#endif  // NETANOMALY_TESTS_SUPPORT_HPP_
