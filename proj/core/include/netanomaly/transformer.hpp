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

#ifndef NETANOMALY_TRANSFORMER_HPP_
#define NETANOMALY_TRANSFORMER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "netanomaly/tensor.hpp"

namespace netanomaly {

struct TransformerConfig {
  std::size_t d_model = 32;
  std::size_t num_heads = 4;
  std::size_t num_blocks = 2;
  std::size_t d_ff = 64;
  std::size_t seq_len = 128;
  bool positional_encoding = true;

  // Training.
  std::size_t epochs = 100;
  double learning_rate = 0.001;
  std::size_t patience = 10;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;

  // Throws ConfigError on an inconsistent architecture.
  void validate() const;
  std::size_t d_k() const { return d_model / num_heads; }

  bool operator==(const TransformerConfig&) const = default;
};

struct AttentionHead {
  DenseArray w_q, w_k, w_v;  // d_model x d_k

  bool operator==(const AttentionHead&) const = default;
};

struct EncoderBlock {
  std::vector<AttentionHead> heads;
  DenseArray w_o;                 // d_model x d_model
  DenseArray ln1_gain, ln1_bias;  // 1 x d_model
  DenseArray w1, b1;              // d_model x d_ff, 1 x d_ff
  DenseArray w2, b2;              // d_ff x d_model, 1 x d_model
  DenseArray ln2_gain, ln2_bias;  // 1 x d_model

  bool operator==(const EncoderBlock&) const = default;
};

// Encoder classifier over windows of seq_len records. The same type doubles
// as the container for its own gradient.
struct TransformerModel {
  TransformerConfig config;
  std::size_t feature_dim = 0;
  DenseArray input_projection;  // feature_dim x d_model
  std::vector<EncoderBlock> blocks;
  DenseArray head_weights;  // d_model x 2
  DenseArray head_bias;     // 1 x 2

  std::size_t parameter_count() const;
  // Throws ShapeError/ConfigError if shapes disagree with config.
  void validate() const;

  bool operator==(const TransformerModel&) const = default;
};

// Visits every parameter array in a fixed order.
void for_each_parameter(TransformerModel& model,
                        const std::function<void(DenseArray&)>& fn);
void for_each_parameter(const TransformerModel& model,
                        const std::function<void(const DenseArray&)>& fn);

TransformerModel zeros_like(const TransformerModel& model);

// All parameters in for_each_parameter order.
std::vector<double> flatten(const TransformerModel& model);
void unflatten(TransformerModel& model, std::span<const double> values);

TransformerModel init_transformer(std::size_t feature_dim,
                                  const TransformerConfig& config);

// Sinusoidal position features. Throws InputError for odd or zero d_model.
DenseArray positional_encoding(std::size_t seq_len, std::size_t d_model);

// softmax(q k^T / sqrt(d_k)) v.
DenseArray scaled_dot_attention(const DenseArray& q, const DenseArray& k,
                                const DenseArray& v,
                                FlopCounter* counter = nullptr);

// Self-attention over x with the block's heads, concatenated and projected
// by W_O. Throws ConfigError when `heads` does not divide d_model or does
// not match the block.
DenseArray multi_head_attention(const DenseArray& x, const EncoderBlock& block,
                                std::size_t heads,
                                FlopCounter* counter = nullptr);

// max(0, z W1 + b1) W2 + b2.
DenseArray ffn_forward(const DenseArray& z, const DenseArray& w1,
                       const DenseArray& b1, const DenseArray& w2,
                       const DenseArray& b2, FlopCounter* counter = nullptr);

inline constexpr double kLayerNormEps = 1e-5;

// Row-wise normalization to zero mean, unit variance, then gain and bias.
DenseArray layer_norm(const DenseArray& x, const DenseArray& gain,
                      const DenseArray& bias);

struct EncoderOutput {
  std::array<double, 2> probs{};  // {normal, anomaly}
  DenseArray pooled;              // 1 x d_model
};

// Throws InputError unless window is seq_len x feature_dim.
EncoderOutput encoder_forward(const TransformerModel& model,
                              const DenseArray& window,
                              FlopCounter* counter = nullptr);

// Probability of the anomaly class for one window.
double anomaly_probability(const TransformerModel& model,
                           const DenseArray& window);

struct LossAndGradient {
  double loss = 0.0;
  TransformerModel gradient;
};

// Mean cross-entropy over the windows and its analytic gradient.
LossAndGradient classifier_loss_and_gradient(
    const TransformerModel& model, const std::vector<DenseArray>& windows,
    const std::vector<int>& labels);

double classifier_loss(const TransformerModel& model,
                       const std::vector<DenseArray>& windows,
                       const std::vector<int>& labels);

struct TrainingResult {
  TransformerModel model;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_validation_loss = 0.0;
  std::vector<std::string> warnings;
};

// Minibatch Adam on mean cross-entropy. Keeps the parameters with the lowest
// validation loss and stops after `patience` epochs without improvement.
// With no validation windows the training loss is monitored instead.
TrainingResult train_classifier(const TransformerModel& init,
                                const std::vector<DenseArray>& windows,
                                const std::vector<int>& labels,
                                const std::vector<DenseArray>& val_windows,
                                const std::vector<int>& val_labels);

}  // namespace netanomaly

#endif  // NETANOMALY_TRANSFORMER_HPP_
