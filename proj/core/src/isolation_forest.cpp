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

#include "netanomaly/isolation_forest.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

#include "netanomaly/error.hpp"
#include "netanomaly/random.hpp"

namespace netanomaly {

double c_factor(std::size_t n) {
  if (n <= 1) return 0.0;
  const double nd = static_cast<double>(n);
  const double harmonic = std::log(nd - 1.0) + kEulerApprox;
  return 2.0 * harmonic - 2.0 * (nd - 1.0) / nd;
}

std::size_t IsoTree::height() const {
  if (nodes.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    const IsoNode& node = nodes[static_cast<std::size_t>(id)];
    best = std::max(best, depth);
    if (!node.is_leaf()) {
      stack.push_back({node.left, depth + 1});
      stack.push_back({node.right, depth + 1});
    }
  }
  return best;
}

IsoForest::IsoForest(std::vector<IsoTree> trees, std::size_t num_features,
                     ForestConfig config)
    : trees_(std::move(trees)),
      num_features_(num_features),
      config_(config),
      c_norm_(c_factor(config.subsample_size)) {
  config_.num_trees = trees_.size();
}

std::size_t IsoForest::total_nodes() const {
  std::size_t n = 0;
  for (const auto& t : trees_) n += t.nodes.size();
  return n;
}

double IsoForest::expected_comparisons() const {
  double total = 0.0;
  for (const auto& tree : trees_) {
    if (tree.nodes.empty()) continue;
    double weighted = 0.0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [id, depth] = stack.back();
      stack.pop_back();
      const IsoNode& node = tree.nodes[static_cast<std::size_t>(id)];
      if (node.is_leaf()) {
        weighted += static_cast<double>(node.size * depth);
      } else {
        stack.push_back({node.left, depth + 1});
        stack.push_back({node.right, depth + 1});
      }
    }
    total += weighted / static_cast<double>(tree.nodes.front().size);
  }
  return total;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const DenseArray& data, std::size_t max_depth, Rng& rng)
      : data_(data), max_depth_(max_depth), rng_(rng) {}

  std::int32_t build(std::span<std::size_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(IsoNode{.size = rows.size()});
    if (rows.size() <= 1 || depth >= max_depth_) return id;

    // Candidate features are those with a nonzero range at this node.
    candidates_.clear();
    ranges_.clear();
    for (std::size_t f = 0; f < data_.cols(); ++f) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t r : rows) {
        const double v = data_(r, f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (lo < hi) {
        candidates_.push_back(f);
        ranges_.emplace_back(lo, hi);
      }
    }
    if (candidates_.empty()) return id;

    const std::size_t pick = rng_.below(candidates_.size());
    const std::size_t feature = candidates_[pick];
    const auto [lo, hi] = ranges_[pick];
    double split = lo + (hi - lo) * rng_.uniform_open();
    // Rounding can land on an endpoint when the range is a few ulps wide.
    if (!(split > lo && split < hi)) split = std::nextafter(lo, hi);
    if (!(split < hi)) return id;

    auto middle = std::partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return data_(r, feature) < split;
    });
    const auto left_count = static_cast<std::size_t>(middle - rows.begin());

    nodes_[static_cast<std::size_t>(id)].feature =
        static_cast<std::int32_t>(feature);
    nodes_[static_cast<std::size_t>(id)].split_value = split;
    const std::int32_t left = build(rows.subspan(0, left_count), depth + 1);
    const std::int32_t right = build(rows.subspan(left_count), depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  std::vector<IsoNode> take() { return std::move(nodes_); }

 private:
  const DenseArray& data_;
  std::size_t max_depth_;
  Rng& rng_;
  std::vector<IsoNode> nodes_;
  std::vector<std::size_t> candidates_;
  std::vector<std::pair<double, double>> ranges_;
};

void validate(const DenseArray& data, const ForestConfig& config) {
  if (data.rows() == 0 || data.cols() == 0) {
    throw InputError("build_forest: empty data");
  }
  if (config.subsample_size == 0) {
    throw InputError("build_forest: subsample_size must be positive");
  }
  if (config.subsample_size > data.rows()) {
    throw InputError("build_forest: subsample_size " +
                     std::to_string(config.subsample_size) + " exceeds " +
                     std::to_string(data.rows()) + " rows");
  }
}

}  // namespace

IsoTree build_tree(const DenseArray& data, const ForestConfig& config,
                   std::size_t tree_index) {
  validate(data, config);
  Rng rng(split_seed(config.seed, tree_index));

  // Partial Fisher-Yates: the first subsample_size slots are a uniform
  // sample without replacement.
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (std::size_t i = 0; i < config.subsample_size; ++i) {
    const std::size_t j = i + rng.below(rows.size() - i);
    std::swap(rows[i], rows[j]);
  }
  rows.resize(config.subsample_size);

  TreeBuilder builder(data, config.max_depth, rng);
  builder.build(rows, 0);
  return IsoTree{builder.take()};
}

IsoForest build_forest(const DenseArray& data, const ForestConfig& config) {
  validate(data, config);
  std::vector<IsoTree> trees(config.num_trees);
  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, config.num_trees));
  if (workers <= 1) {
    for (std::size_t t = 0; t < config.num_trees; ++t)
      trees[t] = build_tree(data, config, t);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t t = w; t < config.num_trees; t += workers)
          trees[t] = build_tree(data, config, t);
      }));
    }
    for (auto& j : jobs) j.get();
  }
  return IsoForest(std::move(trees), data.cols(), config);
}

double path_length(const IsoTree& tree, std::span<const double> point) {
  if (tree.nodes.empty()) throw InputError("path_length: empty tree");
  std::size_t id = 0;
  double edges = 0.0;
  while (!tree.nodes[id].is_leaf()) {
    const IsoNode& node = tree.nodes[id];
    const auto f = static_cast<std::size_t>(node.feature);
    if (f >= point.size()) {
      throw InputError("path_length: point has " +
                       std::to_string(point.size()) +
                       " features, tree splits on feature " +
                       std::to_string(f));
    }
    id = static_cast<std::size_t>(point[f] < node.split_value ? node.left
                                                              : node.right);
    edges += 1.0;
  }
  return edges + c_factor(tree.nodes[id].size);
}

double score_from_mean_path(double mean_path, double c_norm) {
  if (c_norm <= 0.0) return mean_path > 0.0 ? 0.5 : 1.0;
  return std::exp2(-mean_path / c_norm);
}

double anomaly_score(const IsoForest& forest, std::span<const double> point) {
  if (forest.num_trees() == 0) throw InputError("anomaly_score: empty forest");
  if (point.size() != forest.num_features()) {
    throw InputError("anomaly_score: point has " +
                     std::to_string(point.size()) + " features, forest expects " +
                     std::to_string(forest.num_features()));
  }
  double total = 0.0;
  for (const auto& tree : forest.trees()) total += path_length(tree, point);
  return score_from_mean_path(total / static_cast<double>(forest.num_trees()),
                              forest.c_norm());
}

std::vector<double> anomaly_scores(const IsoForest& forest,
                                   const DenseArray& points) {
  std::vector<double> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i)
    out[i] = anomaly_score(forest, points.row(i));
  return out;
}

}  // namespace netanomaly
