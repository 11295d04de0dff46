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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "netanomaly/error.hpp"
#include "netanomaly/experiment.hpp"
#include "netanomaly/isolation_forest.hpp"
#include "support.hpp"

namespace na = netanomaly;
using na::DenseArray;

namespace {

DenseArray cluster(std::size_t n, std::size_t d, std::uint64_t seed) {
  na::Rng rng(seed);
  DenseArray a(n, d);
  for (double& v : a.data()) v = rng.normal();
  return a;
}

// Routes every row of `data` through `tree` and checks that each internal
// split lies strictly inside the range of the rows that reach it.
void check_splits_inside_range(const na::IsoTree& tree, const DenseArray& data) {
  std::vector<std::vector<std::size_t>> reach(tree.nodes.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    std::int32_t node = 0;
    while (true) {
      reach[node].push_back(i);
      const na::IsoNode& n = tree.nodes[node];
      if (n.is_leaf()) break;
      node = data(i, n.feature) < n.split_value ? n.left : n.right;
    }
  }
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    const na::IsoNode& n = tree.nodes[k];
    if (n.is_leaf()) {
      CHECK(n.size == reach[k].size());
      continue;
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i : reach[k]) {
      lo = std::min(lo, data(i, n.feature));
      hi = std::max(hi, data(i, n.feature));
    }
    CHECK(lo < n.split_value);
    CHECK(n.split_value < hi);
  }
}

// Probe points spread well beyond the unit cluster.
DenseArray testing_probe(std::size_t d, na::Rng& rng) {
  DenseArray probes(20, d);
  for (double& v : probes.data()) v = rng.uniform(-6.0, 6.0);
  return probes;
}

}  // namespace

TEST_CASE("c_factor fixtures") {
  CHECK(na::c_factor(0) == 0.0);
  CHECK(na::c_factor(1) == 0.0);
  CHECK(na::c_factor(2) == doctest::Approx(0.1544).epsilon(1e-12));
  CHECK(std::abs(na::c_factor(256) - 10.2447) <= 1e-3);
}

TEST_CASE("score from mean path length") {
  const double c = na::c_factor(256);
  CHECK(std::abs(na::score_from_mean_path(c, c) - 0.5) <= 1e-12);
  CHECK(na::score_from_mean_path(0.0, c) == 1.0);
  CHECK(na::score_from_mean_path(2.0 * c, c) == doctest::Approx(0.25));
}

TEST_CASE("score is strictly decreasing in mean path length") {
  const double c = na::c_factor(256);
  double previous = na::score_from_mean_path(0.0, c);
  for (int i = 1; i <= 400; ++i) {
    const double s = na::score_from_mean_path(0.05 * i, c);
    CHECK(s < previous);
    CHECK(s > 0.0);
    previous = s;
  }
}

TEST_CASE("path length on hand-built trees") {
  na::IsoTree leaf;
  leaf.nodes.push_back(na::IsoNode{-1, 0.0, -1, -1, 7});
  const std::vector<double> p{0.3};
  CHECK(na::path_length(leaf, p) == doctest::Approx(na::c_factor(7)));

  na::IsoTree split;
  split.nodes.push_back(na::IsoNode{0, 0.5, 1, 2, 4});
  split.nodes.push_back(na::IsoNode{-1, 0.0, -1, -1, 1});
  split.nodes.push_back(na::IsoNode{-1, 0.0, -1, -1, 3});
  CHECK(na::path_length(split, std::vector<double>{0.2}) == 1.0);
  CHECK(na::path_length(split, std::vector<double>{0.9}) ==
        doctest::Approx(1.0 + na::c_factor(3)));
  CHECK_THROWS_AS(na::path_length(split, std::vector<double>{}),
                  na::InputError);
}

TEST_CASE("build errors") {
  na::ForestConfig cfg;
  CHECK_THROWS_AS(na::build_forest(DenseArray(0, 3), cfg), na::InputError);
  cfg.subsample_size = 11;
  CHECK_THROWS_AS(na::build_forest(cluster(10, 2, 1), cfg), na::InputError);
}

TEST_CASE("same data, config and seed give identical forests") {
  const DenseArray data = cluster(300, 4, 2);
  na::ForestConfig cfg;
  cfg.num_trees = 20;
  cfg.seed = 77;
  CHECK(na::build_forest(data, cfg) == na::build_forest(data, cfg));
  na::ForestConfig other = cfg;
  other.seed = 78;
  CHECK_FALSE(na::build_forest(data, cfg) == na::build_forest(data, other));
}

TEST_CASE("trees at existing indices do not depend on the tree count") {
  const DenseArray data = cluster(300, 3, 3);
  na::ForestConfig small;
  small.num_trees = 5;
  small.seed = 5;
  na::ForestConfig large = small;
  large.num_trees = 12;
  const na::IsoForest a = na::build_forest(data, small);
  const na::IsoForest b = na::build_forest(data, large);
  for (std::size_t t = 0; t < small.num_trees; ++t) {
    CHECK(a.trees()[t] == b.trees()[t]);
    CHECK(na::build_tree(data, large, t) == b.trees()[t]);
  }
}

TEST_CASE("forest invariants") {
  const DenseArray data = cluster(200, 3, 4);
  na::ForestConfig cfg;
  cfg.num_trees = 30;
  cfg.subsample_size = 200;
  cfg.max_depth = 6;
  cfg.seed = 9;
  const na::IsoForest forest = na::build_forest(data, cfg);
  CHECK(forest.num_trees() == 30);
  CHECK(forest.c_norm() == na::c_factor(200));
  for (const auto& tree : forest.trees()) {
    CHECK(tree.height() <= cfg.max_depth);
    check_splits_inside_range(tree, data);
  }
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (const auto& tree : forest.trees()) {
      CHECK(na::path_length(tree, data.row(i)) <=
            cfg.max_depth + na::c_factor(cfg.subsample_size));
    }
  }
}

TEST_CASE("max_depth 0 gives single-leaf trees") {
  na::ForestConfig cfg;
  cfg.num_trees = 3;
  cfg.subsample_size = 50;
  cfg.max_depth = 0;
  const na::IsoForest forest = na::build_forest(cluster(80, 2, 5), cfg);
  for (const auto& tree : forest.trees()) {
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].size == 50);
  }
}

TEST_CASE("constant features are never split") {
  na::Rng rng(6);
  DenseArray data(150, 2);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    data(i, 0) = 4.0;
    data(i, 1) = rng.normal();
  }
  na::ForestConfig cfg;
  cfg.num_trees = 25;
  cfg.subsample_size = 128;
  const na::IsoForest forest = na::build_forest(data, cfg);
  for (const auto& tree : forest.trees())
    for (const auto& node : tree.nodes)
      if (!node.is_leaf()) CHECK(node.feature == 1);
}

TEST_CASE("all-constant data produces leaves only") {
  na::ForestConfig cfg;
  cfg.num_trees = 4;
  cfg.subsample_size = 16;
  const na::IsoForest forest = na::build_forest(DenseArray(20, 3, 1.0), cfg);
  for (const auto& tree : forest.trees()) CHECK(tree.nodes.size() == 1);
  const double s = na::anomaly_score(forest, std::vector<double>{1, 1, 1});
  CHECK(s == doctest::Approx(0.5));
}

TEST_CASE("scores lie in (0, 1] on random forests and points") {
  na::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(60), d = 1 + rng.below(4);
    const DenseArray data = cluster(n, d, 1000 + trial);
    na::ForestConfig cfg;
    cfg.num_trees = 1 + rng.below(8);
    cfg.subsample_size = 1 + rng.below(n);
    cfg.max_depth = rng.below(8);
    cfg.seed = trial;
    const na::IsoForest forest = na::build_forest(data, cfg);
    const DenseArray probes = testing_probe(d, rng);
    for (double s : na::anomaly_scores(forest, probes)) {
      CHECK(s > 0.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("seeded outlier fixture ranks the outlier above the medoid") {
  const na::Dataset fixture = na::seeded_outlier_fixture();
  const DenseArray data = na::feature_matrix(fixture);
  REQUIRE(data.rows() == 201);
  // Medoid of the cluster: the point with the smallest total distance.
  std::size_t medoid = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 200; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < 200; ++j)
      total += std::hypot(data(i, 0) - data(j, 0), data(i, 1) - data(j, 1));
    if (total < best) {
      best = total;
      medoid = i;
    }
  }
  na::ForestConfig cfg;
  cfg.seed = 42;
  cfg.subsample_size = 128;
  const na::IsoForest forest = na::build_forest(data, cfg);
  const double outlier = na::anomaly_score(forest, data.row(200));
  const double centre = na::anomaly_score(forest, data.row(medoid));
  CHECK(outlier > centre);
  CHECK(outlier > 0.6);
  CHECK(centre < 0.5);
}

TEST_CASE("dimension mismatch is an input error") {
  na::ForestConfig cfg;
  cfg.num_trees = 2;
  cfg.subsample_size = 8;
  const na::IsoForest forest = na::build_forest(cluster(10, 2, 8), cfg);
  CHECK_THROWS_AS(na::anomaly_score(forest, std::vector<double>{1.0}),
                  na::InputError);
}
