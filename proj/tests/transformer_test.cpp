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

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "netanomaly/error.hpp"
#include "netanomaly/transformer.hpp"
#include "support.hpp"

namespace na = netanomaly;
using na::DenseArray;
using na::testing::random_array;

namespace {

na::TransformerConfig small_config(std::size_t seq_len, std::size_t d_model,
                                   std::size_t heads, std::size_t blocks) {
  na::TransformerConfig cfg;
  cfg.seq_len = seq_len;
  cfg.d_model = d_model;
  cfg.num_heads = heads;
  cfg.num_blocks = blocks;
  cfg.d_ff = 2 * d_model;
  return cfg;
}

DenseArray as_array(const std::vector<double>& v) {
  return DenseArray(1, v.size(), v);
}

double gradient_error(const na::TransformerModel& model,
                      const std::vector<DenseArray>& windows,
                      const std::vector<int>& labels) {
  const na::LossAndGradient lg =
      na::classifier_loss_and_gradient(model, windows, labels);
  const DenseArray numeric = na::finite_diff_grad(
      [&](const DenseArray& flat) {
        na::TransformerModel m = model;
        na::unflatten(m, flat.data());
        return na::classifier_loss(m, windows, labels);
      },
      as_array(na::flatten(model)));
  return na::max_relative_error(as_array(na::flatten(lg.gradient)), numeric);
}

// Block whose single head and output projection are identities.
na::EncoderBlock identity_block(std::size_t d) {
  na::EncoderBlock b;
  b.heads.push_back(na::AttentionHead{DenseArray::identity(d),
                                      DenseArray::identity(d),
                                      DenseArray::identity(d)});
  b.w_o = DenseArray::identity(d);
  return b;
}

}  // namespace

TEST_CASE("positional encoding fixtures") {
  const DenseArray pe = na::positional_encoding(6, 8);
  for (std::size_t j = 0; j < 8; ++j) CHECK(pe(0, j) == (j % 2 == 0 ? 0.0 : 1.0));
  CHECK(pe(1, 0) == doctest::Approx(0.841471).epsilon(1e-6));
  CHECK(pe(1, 1) == doctest::Approx(std::cos(1.0)));
  CHECK(pe(3, 2) == doctest::Approx(std::sin(3.0 / std::pow(10000.0, 2.0 / 8.0))));
  CHECK_THROWS_AS(na::positional_encoding(4, 5), na::InputError);
  CHECK_THROWS_AS(na::positional_encoding(4, 0), na::InputError);
}

TEST_CASE("positional encoding is bounded and rows are distinct") {
  for (std::size_t d : {2u, 4u, 8u, 32u}) {
    const DenseArray pe = na::positional_encoding(512, d);
    std::set<std::vector<double>> rows;
    for (std::size_t i = 0; i < pe.rows(); ++i) {
      for (double v : pe.row(i)) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
      }
      rows.insert(std::vector<double>(pe.row(i).begin(), pe.row(i).end()));
    }
    CHECK(rows.size() == 512);
  }
}

TEST_CASE("attention special cases") {
  na::Rng rng(1);
  const DenseArray q = random_array(3, 2, rng);
  const DenseArray v = random_array(4, 3, rng);
  const DenseArray same_keys(4, 2, 0.7);
  const DenseArray out = na::scaled_dot_attention(q, same_keys, v);
  const DenseArray mean = na::column_means(v);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j)
      CHECK(out(i, j) == doctest::Approx(mean(0, j)).epsilon(1e-12));

  const DenseArray one_v{{4.0, -1.0, 2.5}};
  const DenseArray single =
      na::scaled_dot_attention(q, random_array(1, 2, rng), one_v);
  for (std::size_t i = 0; i < single.rows(); ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(single(i, j) == doctest::Approx(one_v(0, j)).epsilon(1e-12));

  CHECK_THROWS_AS(na::scaled_dot_attention(q, random_array(4, 3, rng), v),
                  na::ShapeError);
  CHECK_THROWS_AS(na::scaled_dot_attention(q, random_array(4, 2, rng),
                                           random_array(5, 3, rng)),
                  na::ShapeError);
}

TEST_CASE("attention outputs stay within each value column's range") {
  na::Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(8), m = 1 + rng.below(8),
                      dk = 1 + rng.below(6), dv = 1 + rng.below(6);
    const DenseArray q = random_array(n, dk, rng, -4, 4);
    const DenseArray k = random_array(m, dk, rng, -4, 4);
    const DenseArray v = random_array(m, dv, rng, -4, 4);
    const DenseArray out = na::scaled_dot_attention(q, k, v);
    REQUIRE(out.rows() == n);
    REQUIRE(out.cols() == dv);
    for (std::size_t j = 0; j < dv; ++j) {
      double lo = v(0, j), hi = v(0, j);
      for (std::size_t r = 1; r < m; ++r) {
        lo = std::min(lo, v(r, j));
        hi = std::max(hi, v(r, j));
      }
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(out(i, j) >= lo - 1e-12);
        CHECK(out(i, j) <= hi + 1e-12);
      }
    }
  }
}

TEST_CASE("multi-head attention") {
  na::Rng rng(3);
  const DenseArray x = random_array(5, 4, rng);
  const na::EncoderBlock id = identity_block(4);
  const DenseArray expected = na::scaled_dot_attention(x, x, x);
  const DenseArray got = na::multi_head_attention(x, id, 1);
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got.data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-12));

  na::EncoderBlock zero_out = id;
  zero_out.w_o = DenseArray(4, 4);
  CHECK(na::multi_head_attention(x, zero_out, 1) == DenseArray(5, 4));

  CHECK_THROWS_AS(na::multi_head_attention(x, id, 3), na::ConfigError);
  CHECK_THROWS_AS(na::multi_head_attention(x, id, 2), na::ConfigError);

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t heads = 1 + rng.below(4);
    const std::size_t d = 2 * heads * (1 + rng.below(2));
    const na::TransformerModel model =
        na::init_transformer(3, small_config(6, d, heads, 1));
    const DenseArray in = random_array(6, d, rng);
    const DenseArray out = na::multi_head_attention(in, model.blocks[0], heads);
    CHECK(out.rows() == in.rows());
    CHECK(out.cols() == in.cols());
  }
}

TEST_CASE("feed-forward fixtures") {
  const DenseArray z{{1.0, -1.0}};
  CHECK(na::ffn_forward(z, DenseArray::identity(2), DenseArray(1, 2),
                        DenseArray{{2.0}, {2.0}}, DenseArray{{1.0}}) ==
        DenseArray{{3.0}});

  const DenseArray nonneg{{0.5, 2.0}, {3.0, 0.0}};
  CHECK(na::ffn_forward(nonneg, DenseArray::identity(2), DenseArray(1, 2),
                        DenseArray::identity(2), DenseArray(1, 2)) == nonneg);

  const DenseArray b2{{0.25, -4.0}};
  const DenseArray dead = na::ffn_forward(nonneg, DenseArray::identity(2),
                                          DenseArray(1, 2, -10.0),
                                          DenseArray::identity(2), b2);
  for (std::size_t i = 0; i < dead.rows(); ++i) {
    CHECK(dead(i, 0) == 0.25);
    CHECK(dead(i, 1) == -4.0);
  }
  CHECK_THROWS_AS(na::ffn_forward(z, DenseArray::identity(3), DenseArray(1, 3),
                                  DenseArray::identity(3), DenseArray(1, 3)),
                  na::ShapeError);
}

TEST_CASE("layer norm produces standardized rows") {
  na::Rng rng(4);
  const DenseArray x = random_array(6, 8, rng, -3, 3);
  const DenseArray y = na::layer_norm(x, DenseArray(1, 8, 1.0), DenseArray(1, 8));
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double mean = 0.0, var = 0.0;
    for (double v : y.row(i)) mean += v;
    mean /= 8.0;
    for (double v : y.row(i)) var += (v - mean) * (v - mean);
    CHECK(std::abs(mean) <= 1e-12);
    CHECK(var / 8.0 == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("encoder forward contract") {
  na::TransformerConfig cfg = small_config(6, 8, 2, 2);
  cfg.seed = 5;
  na::TransformerModel model = na::init_transformer(3, cfg);
  na::Rng rng(5);
  const DenseArray window = random_array(6, 3, rng);

  const na::EncoderOutput out = na::encoder_forward(model, window);
  CHECK(out.probs[0] > 0.0);
  CHECK(out.probs[1] > 0.0);
  CHECK(std::abs(out.probs[0] + out.probs[1] - 1.0) <= 1e-9);
  CHECK(out.pooled.cols() == 8);

  const na::EncoderOutput again = na::encoder_forward(model, window);
  CHECK(again.probs == out.probs);

  CHECK_THROWS_AS(na::encoder_forward(model, random_array(5, 3, rng)), na::InputError);
  CHECK_THROWS_AS(na::encoder_forward(model, random_array(6, 4, rng)), na::InputError);

  na::TransformerModel zero_head = model;
  zero_head.head_weights = DenseArray(8, 2);
  zero_head.head_bias = DenseArray(1, 2);
  const na::EncoderOutput half = na::encoder_forward(zero_head, window);
  CHECK(half.probs[0] == 0.5);
  CHECK(half.probs[1] == 0.5);
}

TEST_CASE("row order matters only through positional encoding") {
  na::Rng rng(6);
  const DenseArray window = random_array(6, 3, rng);
  DenseArray reversed(6, 3);
  for (std::size_t i = 0; i < 6; ++i)
    std::copy(window.row(5 - i).begin(), window.row(5 - i).end(),
              reversed.row(i).begin());

  na::TransformerConfig cfg = small_config(6, 8, 2, 2);
  cfg.seed = 6;
  const na::TransformerModel with_pe = na::init_transformer(3, cfg);
  CHECK(na::anomaly_probability(with_pe, window) !=
        na::anomaly_probability(with_pe, reversed));

  cfg.positional_encoding = false;
  const na::TransformerModel without_pe = na::init_transformer(3, cfg);
  CHECK(na::anomaly_probability(without_pe, window) ==
        doctest::Approx(na::anomaly_probability(without_pe, reversed)).epsilon(1e-12));
}

TEST_CASE("config validation") {
  na::TransformerConfig cfg = small_config(4, 6, 4, 1);
  CHECK_THROWS_AS(cfg.validate(), na::ConfigError);
  cfg = small_config(4, 5, 1, 1);
  CHECK_THROWS_AS(cfg.validate(), na::ConfigError);
  cfg.positional_encoding = false;
  CHECK_NOTHROW(cfg.validate());
  cfg = na::TransformerConfig{};
  CHECK(cfg.d_k() == 8);
}

TEST_CASE("parameter count matches the flattened size") {
  const na::TransformerModel model = na::init_transformer(9, na::TransformerConfig{});
  CHECK(model.parameter_count() == na::flatten(model).size());
  na::TransformerModel copy = model;
  na::unflatten(copy, na::flatten(model));
  CHECK(copy == model);
  CHECK_THROWS_AS(na::unflatten(copy, std::vector<double>(3)), na::ShapeError);
}

TEST_CASE("cross-entropy gradient on the two-window fixture") {
  na::TransformerConfig cfg = small_config(3, 4, 2, 1);
  cfg.seed = 7;
  const na::TransformerModel model = na::init_transformer(2, cfg);
  na::Rng rng(7);
  const std::vector<DenseArray> windows{random_array(3, 2, rng),
                                        random_array(3, 2, rng)};
  CHECK(gradient_error(model, windows, {0, 1}) <= 1e-4);
}

TEST_CASE("cross-entropy gradient on random small fixtures") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    na::Rng rng(200 + seed);
    const std::size_t heads = 1 + rng.below(2);
    na::TransformerConfig cfg = small_config(2 + rng.below(3), 2 * heads, heads,
                                             1 + rng.below(2));
    cfg.positional_encoding = rng.below(2) == 1;
    cfg.seed = seed;
    const std::size_t dim = 1 + rng.below(3);
    na::TransformerModel model = na::init_transformer(dim, cfg);
    // Non-trivial layer-norm parameters so their gradients are exercised.
    for (auto& block : model.blocks) {
      block.ln1_gain = random_array(1, cfg.d_model, rng, 0.5, 1.5);
      block.ln2_bias = random_array(1, cfg.d_model, rng, -0.5, 0.5);
      block.b1 = random_array(1, cfg.d_ff, rng, -0.5, 0.5);
    }
    std::vector<DenseArray> windows;
    std::vector<int> labels;
    for (int w = 0; w < 3; ++w) {
      windows.push_back(random_array(cfg.seq_len, dim, rng, -2, 2));
      labels.push_back(static_cast<int>(rng.below(2)));
    }
    CHECK(gradient_error(model, windows, labels) <= 1e-4);
  }
}

TEST_CASE("training contract") {
  na::TransformerConfig cfg = small_config(4, 4, 2, 1);
  cfg.seed = 8;
  cfg.epochs = 0;
  const na::TransformerModel init = na::init_transformer(2, cfg);
  na::Rng rng(8);
  const std::vector<DenseArray> windows{random_array(4, 2, rng), random_array(4, 2, rng)};
  const na::TrainingResult none = na::train_classifier(init, windows, {0, 1}, {}, {});
  CHECK(none.model == init);
  CHECK(none.epochs_run == 0);

  na::TransformerModel trainable = init;
  trainable.config.epochs = 3;
  const na::TrainingResult single =
      na::train_classifier(trainable, windows, {1, 1}, windows, {1, 1});
  REQUIRE_FALSE(single.warnings.empty());
  CHECK(single.warnings.front().find("single class") != std::string::npos);

  const na::TrainingResult a = na::train_classifier(trainable, windows, {0, 1}, windows, {0, 1});
  const na::TrainingResult b = na::train_classifier(trainable, windows, {0, 1}, windows, {0, 1});
  CHECK(a.model == b.model);

  CHECK_THROWS_AS(na::train_classifier(trainable, {}, {}, {}, {}), na::InputError);
  CHECK_THROWS_AS(na::train_classifier(trainable, windows, {0, 2}, {}, {}),
                  na::InputError);
  CHECK_THROWS_AS(na::train_classifier(trainable, windows, {0}, {}, {}),
                  na::InputError);
}

TEST_CASE("separable constant windows are learned within 200 epochs") {
  na::TransformerConfig cfg = small_config(4, 8, 2, 1);
  cfg.epochs = 200;
  cfg.patience = 200;
  cfg.seed = 42;
  const na::TransformerModel init = na::init_transformer(2, cfg);
  std::vector<DenseArray> windows;
  std::vector<int> labels;
  for (int i = 0; i < 16; ++i) {
    const int label = i % 2;
    windows.emplace_back(4, 2, label == 1 ? 1.0 : -1.0);
    labels.push_back(label);
  }
  const na::TrainingResult result =
      na::train_classifier(init, windows, labels, windows, labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const double p = na::anomaly_probability(result.model, windows[i]);
    correct += static_cast<std::size_t>((p > 0.5 ? 1 : 0) == labels[i]);
  }
  CHECK(correct == windows.size());
  CHECK(result.best_validation_loss < 0.05);
}
