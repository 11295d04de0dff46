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

#ifndef NETANOMALY_GAN_HPP_
#define NETANOMALY_GAN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "netanomaly/random.hpp"
#include "netanomaly/tensor.hpp"

namespace netanomaly {

enum class Activation { kRelu, kSigmoid, kIdentity };

struct DenseLayer {
  DenseArray weights;  // in x out
  DenseArray bias;     // 1 x out
  Activation activation = Activation::kIdentity;

  std::size_t in_width() const noexcept { return weights.rows(); }
  std::size_t out_width() const noexcept { return weights.cols(); }
  bool operator==(const DenseLayer&) const = default;
};

// A stack of dense layers. Also used as the shape of its own gradient.
struct MlpParams {
  std::vector<DenseLayer> layers;

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t parameter_count() const;
  // Throws ShapeError when consecutive widths do not chain.
  void validate() const;

  bool operator==(const MlpParams&) const = default;
};

// Glorot-uniform weights, zero biases.
MlpParams init_mlp(std::span<const std::size_t> widths,
                   std::span<const Activation> activations, Rng& rng);

DenseArray mlp_forward(const MlpParams& params, const DenseArray& input,
                       FlopCounter* counter = nullptr);

// Per-layer values kept for backpropagation.
struct MlpTrace {
  std::vector<DenseArray> inputs;   // input to layer k
  std::vector<DenseArray> outputs;  // activated output of layer k
};

DenseArray mlp_forward_traced(const MlpParams& params, const DenseArray& input,
                              MlpTrace& trace);

// Given dL/d(pre-activation of the last layer), accumulates parameter
// gradients into `grads` (same shape as params) and returns dL/d(input).
DenseArray mlp_backward_from_logits(const MlpParams& params,
                                    const MlpTrace& trace,
                                    DenseArray grad_last_preactivation,
                                    MlpParams& grads);

MlpParams zeros_like(const MlpParams& params);
// params += step * direction, layer by layer.
void axpy(MlpParams& params, double step, const MlpParams& direction);

// Flattened parameter vector, used by gradient checks.
std::vector<double> flatten(const MlpParams& params);
void unflatten(MlpParams& params, std::span<const double> values);

inline constexpr double kLogClamp = 1e-7;

// Empirical minimax value: mean log D(x) over real_batch plus
// mean log(1 - D(x)) over fake_batch. D outputs are clamped to
// [1e-7, 1 - 1e-7]. Throws InputError on an empty batch.
double gan_value(const MlpParams& discriminator, const DenseArray& real_batch,
                 const DenseArray& fake_batch);

struct GanConfig {
  std::size_t noise_dim = 100;
  std::size_t iterations = 10000;
  double learning_rate = 0.0002;
  std::size_t batch_size = 64;
  std::size_t hidden_width = 64;
  std::uint64_t seed = 0;

  bool operator==(const GanConfig&) const = default;
};

struct GanModel {
  MlpParams generator;      // noise_dim -> 64 -> 64 -> feature_dim
  MlpParams discriminator;  // feature_dim -> 64 -> 64 -> 32 -> 1
  std::size_t noise_dim = 100;
  std::size_t iterations_trained = 0;
  std::uint64_t rng_seed = 0;

  std::size_t feature_dim() const { return generator.output_width(); }
  std::size_t parameter_count() const {
    return generator.parameter_count() + discriminator.parameter_count();
  }
  void validate() const;

  bool operator==(const GanModel&) const = default;
};

// Three-layer generator and four-layer discriminator with seeded
// initialization.
GanModel init_gan(std::size_t feature_dim, const GanConfig& config);

struct GanGradients {
  MlpParams grad_d;  // ascent direction of the discriminator objective
  MlpParams grad_g;  // gradient of the generator objective (descend it)
};

// Discriminator objective: (1/m) sum [log D(x_i) + log(1 - D(G(z_i)))].
double discriminator_objective(const GanModel& model,
                               const DenseArray& real_batch,
                               const DenseArray& noise_batch);
// Generator objective: (1/m) sum log(1 - D(G(z_i))).
double generator_objective(const GanModel& model,
                           const DenseArray& noise_batch);

// Analytic gradients of both objectives; grad_g flows through a frozen D.
GanGradients adversarial_gradients(const GanModel& model,
                                   const DenseArray& real_batch,
                                   const DenseArray& noise_batch);

// Alternating plain minibatch steps: ascend D, then descend G.
// Throws InputError when real_data has fewer rows than the batch size.
GanModel train_gan(const DenseArray& real_data, const GanConfig& config);

DenseArray sample_noise(std::size_t n, std::size_t noise_dim, Rng& rng);

// n rows of G applied to standard-normal noise drawn from `seed`.
DenseArray generate_synthetic(const GanModel& model, std::size_t n,
                              std::uint64_t seed);

// Finite distribution over points; used by the optimal-discriminator and
// Jensen-Shannon identities.
struct DiscreteDist {
  std::vector<std::vector<double>> support;
  std::vector<double> probs;

  // Throws InputError unless probs are nonnegative and sum to 1 (1e-12).
  void validate() const;
  // Probability mass at `x`, zero if x is not in the support.
  double mass_at(std::span<const double> x) const;
};

// p_data(x) / (p_data(x) + p_g(x)). DomainError if x is in neither support.
double optimal_discriminator(const DiscreteDist& p_data, const DiscreteDist& p_g,
                             std::span<const double> x);

// Natural-log Jensen-Shannon divergence over the union of supports.
double js_divergence(const DiscreteDist& p, const DiscreteDist& q);

}  // namespace netanomaly

#endif  // NETANOMALY_GAN_HPP_
