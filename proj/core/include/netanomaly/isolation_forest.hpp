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

#ifndef NETANOMALY_ISOLATION_FOREST_HPP_
#define NETANOMALY_ISOLATION_FOREST_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "netanomaly/tensor.hpp"

namespace netanomaly {

// Average path length of an unsuccessful BST search over n points, with the
// harmonic number approximated as ln(i) + 0.5772. Zero for n <= 1.
double c_factor(std::size_t n);

// Harmonic-number approximation shared by c_factor.
inline constexpr double kEulerApprox = 0.5772;

struct IsoNode {
  // Internal nodes have feature >= 0; leaves have feature == -1.
  std::int32_t feature = -1;
  double split_value = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Number of build points that reached this node.
  std::size_t size = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const IsoNode&) const = default;
};

// One isolation tree stored as an arena; node 0 is the root.
struct IsoTree {
  std::vector<IsoNode> nodes;

  std::size_t height() const;
  bool operator==(const IsoTree&) const = default;
};

struct ForestConfig {
  std::size_t num_trees = 100;
  std::size_t subsample_size = 256;
  std::size_t max_depth = 10;
  std::uint64_t seed = 0;

  bool operator==(const ForestConfig&) const = default;
};

class IsoForest {
 public:
  IsoForest() = default;
  IsoForest(std::vector<IsoTree> trees, std::size_t num_features,
            ForestConfig config);

  const std::vector<IsoTree>& trees() const noexcept { return trees_; }
  std::size_t num_trees() const noexcept { return trees_.size(); }
  std::size_t num_features() const noexcept { return num_features_; }
  std::size_t subsample_size() const noexcept {
    return config_.subsample_size;
  }
  const ForestConfig& config() const noexcept { return config_; }
  double c_norm() const noexcept { return c_norm_; }

  std::size_t total_nodes() const;

  // Expected number of split comparisons per scored point, averaged over
  // build-time leaf occupancy and summed over trees.
  double expected_comparisons() const;

  bool operator==(const IsoForest&) const = default;

 private:
  std::vector<IsoTree> trees_;
  std::size_t num_features_ = 0;
  ForestConfig config_;
  double c_norm_ = 0.0;
};

// Builds tree `tree_index` of a forest. The tree depends only on
// (data, config, tree_index), never on its siblings.
IsoTree build_tree(const DenseArray& data, const ForestConfig& config,
                   std::size_t tree_index);

// Builds config.num_trees trees in parallel. Throws InputError on empty data
// or subsample_size > rows.
IsoForest build_forest(const DenseArray& data, const ForestConfig& config);

// Edges from root to the reached leaf plus c_factor(leaf size).
double path_length(const IsoTree& tree, std::span<const double> point);

// 2^(-mean path length / c_norm), in (0, 1].
double anomaly_score(const IsoForest& forest, std::span<const double> point);

// anomaly_score for every row.
std::vector<double> anomaly_scores(const IsoForest& forest,
                                   const DenseArray& points);

// Score from a given mean path length, exposed for property tests.
double score_from_mean_path(double mean_path, double c_norm);

}  // namespace netanomaly

#endif  // NETANOMALY_ISOLATION_FOREST_HPP_
