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

#include "netanomaly/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netanomaly/error.hpp"

namespace netanomaly {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void activate(DenseArray& a, Activation act) {
  switch (act) {
    case Activation::kRelu:
      for (double& v : a.data()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::kSigmoid:
      for (double& v : a.data()) v = sigmoid(v);
      break;
    case Activation::kIdentity:
      break;
  }
}

// Multiplies `grad` in place by the activation derivative, expressed through
// the activated output.
void apply_activation_derivative(DenseArray& grad, const DenseArray& output,
                                 Activation act) {
  switch (act) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < grad.size(); ++i)
        if (output.data()[i] <= 0.0) grad.data()[i] = 0.0;
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const double s = output.data()[i];
        grad.data()[i] *= s * (1.0 - s);
      }
      break;
    case Activation::kIdentity:
      break;
  }
}

bool unclamped(double d) { return d > kLogClamp && d < 1.0 - kLogClamp; }

double clamp_prob(double d) {
  return std::clamp(d, kLogClamp, 1.0 - kLogClamp);
}

void require_batch(const DenseArray& batch, const char* what) {
  if (batch.rows() == 0) {
    throw InputError(std::string("empty ") + what + " batch");
  }
}

// Accumulates the discriminator objective gradient into `grads`.
void discriminator_gradient(const GanModel& model, const DenseArray& real_batch,
                            const DenseArray& noise_batch, MlpParams& grads) {
  const double m = static_cast<double>(real_batch.rows());

  MlpTrace real_trace;
  const DenseArray d_real =
      mlp_forward_traced(model.discriminator, real_batch, real_trace);
  DenseArray delta_real(d_real.rows(), 1);
  for (std::size_t i = 0; i < d_real.rows(); ++i) {
    const double d = d_real(i, 0);
    delta_real(i, 0) = unclamped(d) ? (1.0 - d) / m : 0.0;
  }
  mlp_backward_from_logits(model.discriminator, real_trace, delta_real, grads);

  const DenseArray fake = mlp_forward(model.generator, noise_batch);
  MlpTrace fake_trace;
  const DenseArray d_fake =
      mlp_forward_traced(model.discriminator, fake, fake_trace);
  DenseArray delta_fake(d_fake.rows(), 1);
  for (std::size_t i = 0; i < d_fake.rows(); ++i) {
    const double d = d_fake(i, 0);
    delta_fake(i, 0) = unclamped(d) ? -d / m : 0.0;
  }
  mlp_backward_from_logits(model.discriminator, fake_trace, delta_fake, grads);
}

// Accumulates the generator objective gradient into `grads`; D is frozen.
void generator_gradient(const GanModel& model, const DenseArray& noise_batch,
                        MlpParams& grads) {
  const double m = static_cast<double>(noise_batch.rows());
  MlpTrace g_trace;
  const DenseArray fake =
      mlp_forward_traced(model.generator, noise_batch, g_trace);
  MlpTrace d_trace;
  const DenseArray d_fake =
      mlp_forward_traced(model.discriminator, fake, d_trace);
  DenseArray delta(d_fake.rows(), 1);
  for (std::size_t i = 0; i < d_fake.rows(); ++i) {
    const double d = d_fake(i, 0);
    delta(i, 0) = unclamped(d) ? -d / m : 0.0;
  }
  MlpParams discarded = zeros_like(model.discriminator);
  DenseArray grad_fake =
      mlp_backward_from_logits(model.discriminator, d_trace, delta, discarded);
  apply_activation_derivative(grad_fake, g_trace.outputs.back(),
                              model.generator.layers.back().activation);
  mlp_backward_from_logits(model.generator, g_trace, std::move(grad_fake),
                           grads);
}

void check_batches(const GanModel& model, const DenseArray& real_batch,
                   const DenseArray& noise_batch) {
  require_batch(real_batch, "real");
  require_batch(noise_batch, "noise");
  if (real_batch.rows() != noise_batch.rows()) {
    throw ShapeError("adversarial_gradients: real batch " +
                     real_batch.shape_string() + " and noise batch " +
                     noise_batch.shape_string() + " differ in rows");
  }
  if (real_batch.cols() != model.discriminator.input_width()) {
    throw ShapeError("adversarial_gradients: real batch " +
                     real_batch.shape_string() +
                     " does not match discriminator input width " +
                     std::to_string(model.discriminator.input_width()));
  }
  if (noise_batch.cols() != model.noise_dim) {
    throw ShapeError("adversarial_gradients: noise batch " +
                     noise_batch.shape_string() + " does not match noise_dim " +
                     std::to_string(model.noise_dim));
  }
}

}  // namespace

std::size_t MlpParams::input_width() const {
  return layers.empty() ? 0 : layers.front().in_width();
}

std::size_t MlpParams::output_width() const {
  return layers.empty() ? 0 : layers.back().out_width();
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void MlpParams::validate() const {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.bias.rows() != 1 || l.bias.cols() != l.out_width()) {
      throw ShapeError("layer " + std::to_string(k) + ": bias " +
                       l.bias.shape_string() + " does not match weights " +
                       l.weights.shape_string());
    }
    if (k + 1 < layers.size() && l.out_width() != layers[k + 1].in_width()) {
      throw ShapeError("layer " + std::to_string(k) + " output width " +
                       std::to_string(l.out_width()) + " != layer " +
                       std::to_string(k + 1) + " input width " +
                       std::to_string(layers[k + 1].in_width()));
    }
  }
}

MlpParams init_mlp(std::span<const std::size_t> widths,
                   std::span<const Activation> activations, Rng& rng) {
  if (widths.size() != activations.size() + 1) {
    throw ConfigError("init_mlp: need one activation per layer");
  }
  MlpParams params;
  for (std::size_t k = 0; k < activations.size(); ++k) {
    const std::size_t in = widths[k], out = widths[k + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer{DenseArray(in, out), DenseArray(1, out), activations[k]};
    for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

DenseArray mlp_forward(const MlpParams& params, const DenseArray& input,
                       FlopCounter* counter) {
  if (!params.layers.empty() && input.cols() != params.input_width()) {
    throw ShapeError("mlp_forward: input " + input.shape_string() +
                     " does not match input width " +
                     std::to_string(params.input_width()));
  }
  DenseArray x = input;
  for (const auto& layer : params.layers) {
    x = add_row_broadcast(matmul(x, layer.weights, counter), layer.bias);
    activate(x, layer.activation);
  }
  return x;
}

DenseArray mlp_forward_traced(const MlpParams& params, const DenseArray& input,
                              MlpTrace& trace) {
  if (!params.layers.empty() && input.cols() != params.input_width()) {
    throw ShapeError("mlp_forward: input " + input.shape_string() +
                     " does not match input width " +
                     std::to_string(params.input_width()));
  }
  trace.inputs.clear();
  trace.outputs.clear();
  DenseArray x = input;
  for (const auto& layer : params.layers) {
    trace.inputs.push_back(x);
    x = add_row_broadcast(matmul(x, layer.weights), layer.bias);
    activate(x, layer.activation);
    trace.outputs.push_back(x);
  }
  return x;
}

DenseArray mlp_backward_from_logits(const MlpParams& params,
                                    const MlpTrace& trace,
                                    DenseArray grad_last_preactivation,
                                    MlpParams& grads) {
  DenseArray delta = std::move(grad_last_preactivation);
  for (std::size_t k = params.layers.size(); k-- > 0;) {
    const auto& layer = params.layers[k];
    auto& g = grads.layers[k];
    g.weights = add(g.weights, transposed_matmul(trace.inputs[k], delta));
    g.bias = add(g.bias, column_sums(delta));
    DenseArray grad_input = matmul_transposed(delta, layer.weights);
    if (k > 0) {
      apply_activation_derivative(grad_input, trace.outputs[k - 1],
                                  params.layers[k - 1].activation);
    }
    delta = std::move(grad_input);
  }
  return delta;
}

MlpParams zeros_like(const MlpParams& params) {
  MlpParams out;
  for (const auto& l : params.layers) {
    out.layers.push_back({DenseArray(l.weights.rows(), l.weights.cols()),
                          DenseArray(l.bias.rows(), l.bias.cols()),
                          l.activation});
  }
  return out;
}

void axpy(MlpParams& params, double step, const MlpParams& direction) {
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto& w = params.layers[k].weights.data();
    const auto& dw = direction.layers[k].weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += step * dw[i];
    auto& b = params.layers[k].bias.data();
    const auto& db = direction.layers[k].bias.data();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += step * db[i];
  }
}

std::vector<double> flatten(const MlpParams& params) {
  std::vector<double> out;
  out.reserve(params.parameter_count());
  for (const auto& l : params.layers) {
    out.insert(out.end(), l.weights.data().begin(), l.weights.data().end());
    out.insert(out.end(), l.bias.data().begin(), l.bias.data().end());
  }
  return out;
}

void unflatten(MlpParams& params, std::span<const double> values) {
  if (values.size() != params.parameter_count()) {
    throw ShapeError("unflatten: " + std::to_string(values.size()) +
                     " values for " + std::to_string(params.parameter_count()) +
                     " parameters");
  }
  std::size_t pos = 0;
  for (auto& l : params.layers) {
    for (double& w : l.weights.data()) w = values[pos++];
    for (double& b : l.bias.data()) b = values[pos++];
  }
}

double gan_value(const MlpParams& discriminator, const DenseArray& real_batch,
                 const DenseArray& fake_batch) {
  require_batch(real_batch, "real");
  require_batch(fake_batch, "fake");
  const DenseArray d_real = mlp_forward(discriminator, real_batch);
  const DenseArray d_fake = mlp_forward(discriminator, fake_batch);
  double real_term = 0.0, fake_term = 0.0;
  for (double d : d_real.data()) real_term += std::log(clamp_prob(d));
  for (double d : d_fake.data()) fake_term += std::log(1.0 - clamp_prob(d));
  return real_term / static_cast<double>(d_real.size()) +
         fake_term / static_cast<double>(d_fake.size());
}

void GanModel::validate() const {
  generator.validate();
  discriminator.validate();
  if (generator.input_width() != noise_dim) {
    throw ShapeError("gan: generator input width " +
                     std::to_string(generator.input_width()) +
                     " != noise_dim " + std::to_string(noise_dim));
  }
  if (generator.output_width() != discriminator.input_width()) {
    throw ShapeError("gan: generator output width " +
                     std::to_string(generator.output_width()) +
                     " != discriminator input width " +
                     std::to_string(discriminator.input_width()));
  }
  if (discriminator.output_width() != 1 ||
      discriminator.layers.back().activation != Activation::kSigmoid) {
    throw ShapeError("gan: discriminator must end in a width-1 sigmoid");
  }
}

GanModel init_gan(std::size_t feature_dim, const GanConfig& config) {
  if (feature_dim == 0 || config.noise_dim == 0) {
    throw ConfigError("init_gan: feature_dim and noise_dim must be positive");
  }
  Rng rng(split_seed(config.seed, 0));
  const std::size_t h = config.hidden_width;
  const std::size_t g_widths[] = {config.noise_dim, h, h, feature_dim};
  const Activation g_acts[] = {Activation::kRelu, Activation::kRelu,
                               Activation::kIdentity};
  const std::size_t d_widths[] = {feature_dim, h, h, h / 2, 1};
  const Activation d_acts[] = {Activation::kRelu, Activation::kRelu,
                               Activation::kRelu, Activation::kSigmoid};
  GanModel model;
  model.generator = init_mlp(g_widths, g_acts, rng);
  model.discriminator = init_mlp(d_widths, d_acts, rng);
  model.noise_dim = config.noise_dim;
  model.rng_seed = config.seed;
  return model;
}

double discriminator_objective(const GanModel& model,
                               const DenseArray& real_batch,
                               const DenseArray& noise_batch) {
  return gan_value(model.discriminator, real_batch,
                   mlp_forward(model.generator, noise_batch));
}

double generator_objective(const GanModel& model,
                           const DenseArray& noise_batch) {
  require_batch(noise_batch, "noise");
  const DenseArray d_fake =
      mlp_forward(model.discriminator, mlp_forward(model.generator, noise_batch));
  double total = 0.0;
  for (double d : d_fake.data()) total += std::log(1.0 - clamp_prob(d));
  return total / static_cast<double>(d_fake.size());
}

GanGradients adversarial_gradients(const GanModel& model,
                                   const DenseArray& real_batch,
                                   const DenseArray& noise_batch) {
  check_batches(model, real_batch, noise_batch);
  GanGradients out{zeros_like(model.discriminator),
                   zeros_like(model.generator)};
  discriminator_gradient(model, real_batch, noise_batch, out.grad_d);
  generator_gradient(model, noise_batch, out.grad_g);
  return out;
}

DenseArray sample_noise(std::size_t n, std::size_t noise_dim, Rng& rng) {
  DenseArray z(n, noise_dim);
  for (double& v : z.data()) v = rng.normal();
  return z;
}

GanModel train_gan(const DenseArray& real_data, const GanConfig& config) {
  if (config.batch_size == 0) throw ConfigError("train_gan: batch size 0");
  if (real_data.rows() < config.batch_size) {
    throw InputError("train_gan: " + std::to_string(real_data.rows()) +
                     " rows is fewer than batch size " +
                     std::to_string(config.batch_size));
  }
  GanModel model = init_gan(real_data.cols(), config);
  Rng rng(split_seed(config.seed, 1));
  const std::size_t m = config.batch_size;
  DenseArray real_batch(m, real_data.cols());
  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto src = real_data.row(rng.below(real_data.rows()));
      std::copy(src.begin(), src.end(), real_batch.row(i).begin());
    }
    const DenseArray d_noise = sample_noise(m, model.noise_dim, rng);
    MlpParams grad_d = zeros_like(model.discriminator);
    discriminator_gradient(model, real_batch, d_noise, grad_d);
    axpy(model.discriminator, config.learning_rate, grad_d);

    const DenseArray g_noise = sample_noise(m, model.noise_dim, rng);
    MlpParams grad_g = zeros_like(model.generator);
    generator_gradient(model, g_noise, grad_g);
    axpy(model.generator, -config.learning_rate, grad_g);
  }
  model.iterations_trained = config.iterations;
  return model;
}

DenseArray generate_synthetic(const GanModel& model, std::size_t n,
                              std::uint64_t seed) {
  Rng rng(seed);
  return mlp_forward(model.generator, sample_noise(n, model.noise_dim, rng));
}

void DiscreteDist::validate() const {
  if (support.size() != probs.size()) {
    throw InputError("DiscreteDist: support and probs differ in length");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InputError("DiscreteDist: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InputError("DiscreteDist: probabilities sum to " +
                     std::to_string(total));
  }
}

double DiscreteDist::mass_at(std::span<const double> x) const {
  double mass = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (std::equal(support[i].begin(), support[i].end(), x.begin(), x.end()))
      mass += probs[i];
  }
  return mass;
}

double optimal_discriminator(const DiscreteDist& p_data, const DiscreteDist& p_g,
                             std::span<const double> x) {
  const double pd = p_data.mass_at(x);
  const double pg = p_g.mass_at(x);
  if (pd + pg <= 0.0) {
    throw DomainError("optimal_discriminator: point outside both supports");
  }
  return pd / (pd + pg);
}

double js_divergence(const DiscreteDist& p, const DiscreteDist& q) {
  std::vector<std::vector<double>> points;
  auto add_unique = [&](const std::vector<double>& x) {
    if (std::find(points.begin(), points.end(), x) == points.end())
      points.push_back(x);
  };
  for (const auto& x : p.support) add_unique(x);
  for (const auto& x : q.support) add_unique(x);

  double kl_p = 0.0, kl_q = 0.0;
  for (const auto& x : points) {
    const double pi = p.mass_at(x), qi = q.mass_at(x);
    const double mi = 0.5 * (pi + qi);
    if (pi > 0.0) kl_p += pi * std::log(pi / mi);
    if (qi > 0.0) kl_q += qi * std::log(qi / mi);
  }
  return 0.5 * kl_p + 0.5 * kl_q;
}

}  // namespace netanomaly
