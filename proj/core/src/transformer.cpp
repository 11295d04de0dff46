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

#include "netanomaly/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "netanomaly/error.hpp"
#include "netanomaly/random.hpp"

namespace netanomaly {
namespace {

struct HeadCache {
  DenseArray q, k, v, probs;
};

struct NormCache {
  DenseArray xhat;
  std::vector<double> inv_std;
};

struct BlockCache {
  DenseArray input;
  std::vector<HeadCache> heads;
  DenseArray concat;
  NormCache norm1;
  DenseArray n1;
  DenseArray hidden_pre;  // z W1 + b1
  DenseArray hidden;      // relu(hidden_pre)
  NormCache norm2;
};

struct WindowCache {
  std::vector<BlockCache> blocks;
  DenseArray final_states;
};

void glorot(DenseArray& w, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (double& v : w.data()) v = rng.uniform(-limit, limit);
}

void add_into(DenseArray& dst, const DenseArray& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

DenseArray layer_norm_impl(const DenseArray& x, const DenseArray& gain,
                           const DenseArray& bias, NormCache* cache) {
  if (gain.cols() != x.cols() || bias.cols() != x.cols()) {
    throw ShapeError("layer_norm: input " + x.shape_string() + ", gain " +
                     gain.shape_string() + ", bias " + bias.shape_string());
  }
  DenseArray out(x.rows(), x.cols());
  if (cache) {
    cache->xhat = DenseArray(x.rows(), x.cols());
    cache->inv_std.assign(x.rows(), 0.0);
  }
  const double n = static_cast<double>(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double xhat = (r[j] - mean) * inv_std;
      out(i, j) = gain(0, j) * xhat + bias(0, j);
      if (cache) cache->xhat(i, j) = xhat;
    }
    if (cache) cache->inv_std[i] = inv_std;
  }
  return out;
}

DenseArray layer_norm_backward(const DenseArray& dy, const NormCache& cache,
                               const DenseArray& gain, DenseArray& dgain,
                               DenseArray& dbias) {
  const std::size_t rows = dy.rows(), cols = dy.cols();
  const double n = static_cast<double>(cols);
  DenseArray dx(rows, cols);
  std::vector<double> dxhat(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double g = dy(i, j);
      dgain(0, j) += g * cache.xhat(i, j);
      dbias(0, j) += g;
      dxhat[j] = g * gain(0, j);
      mean_dxhat += dxhat[j];
      mean_dxhat_xhat += dxhat[j] * cache.xhat(i, j);
    }
    mean_dxhat /= n;
    mean_dxhat_xhat /= n;
    for (std::size_t j = 0; j < cols; ++j) {
      dx(i, j) = cache.inv_std[i] *
                 (dxhat[j] - mean_dxhat - cache.xhat(i, j) * mean_dxhat_xhat);
    }
  }
  return dx;
}

DenseArray attention_probs(const DenseArray& q, const DenseArray& k,
                           FlopCounter* counter) {
  DenseArray logits = matmul_transposed(q, k, counter);
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  for (double& v : logits.data()) v *= inv_scale;
  return softmax_rows(logits);
}

void check_heads(const EncoderBlock& block, std::size_t d_model,
                 std::size_t heads) {
  if (heads == 0 || d_model % heads != 0) {
    throw ConfigError("multi_head_attention: " + std::to_string(heads) +
                      " heads do not divide d_model " +
                      std::to_string(d_model));
  }
  if (block.heads.size() != heads) {
    throw ConfigError("multi_head_attention: block has " +
                      std::to_string(block.heads.size()) + " heads, asked for " +
                      std::to_string(heads));
  }
}

DenseArray attention_forward(const DenseArray& x, const EncoderBlock& block,
                             std::size_t heads, BlockCache* cache,
                             FlopCounter* counter) {
  const std::size_t d_model = x.cols();
  check_heads(block, d_model, heads);
  const std::size_t d_k = d_model / heads;
  DenseArray concat(x.rows(), d_model);
  if (cache) cache->heads.resize(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const AttentionHead& p = block.heads[h];
    DenseArray q = matmul(x, p.w_q, counter);
    DenseArray k = matmul(x, p.w_k, counter);
    DenseArray v = matmul(x, p.w_v, counter);
    if (q.cols() != d_k || k.cols() != d_k || v.cols() != d_k) {
      throw ShapeError("multi_head_attention: head projections must be " +
                       std::to_string(d_model) + "x" + std::to_string(d_k));
    }
    DenseArray probs = attention_probs(q, k, counter);
    assign_cols(concat, matmul(probs, v, counter), h * d_k);
    if (cache) {
      cache->heads[h] = {std::move(q), std::move(k), std::move(v),
                         std::move(probs)};
    }
  }
  DenseArray out = matmul(concat, block.w_o, counter);
  if (cache) cache->concat = std::move(concat);
  return out;
}

DenseArray block_forward(const DenseArray& x, const EncoderBlock& block,
                         std::size_t heads, BlockCache* cache,
                         FlopCounter* counter) {
  if (cache) cache->input = x;
  const DenseArray attended = attention_forward(x, block, heads, cache, counter);
  const DenseArray n1 =
      layer_norm_impl(add(x, attended), block.ln1_gain, block.ln1_bias,
                      cache ? &cache->norm1 : nullptr);
  DenseArray hidden_pre =
      add_row_broadcast(matmul(n1, block.w1, counter), block.b1);
  DenseArray hidden = hidden_pre;
  for (double& v : hidden.data()) v = v > 0.0 ? v : 0.0;
  const DenseArray ffn =
      add_row_broadcast(matmul(hidden, block.w2, counter), block.b2);
  DenseArray out = layer_norm_impl(add(n1, ffn), block.ln2_gain, block.ln2_bias,
                                   cache ? &cache->norm2 : nullptr);
  if (cache) {
    cache->n1 = n1;
    cache->hidden_pre = std::move(hidden_pre);
    cache->hidden = std::move(hidden);
  }
  return out;
}

DenseArray embed(const TransformerModel& model, const DenseArray& window,
                 FlopCounter* counter) {
  if (window.rows() != model.config.seq_len ||
      window.cols() != model.feature_dim) {
    throw InputError("encoder_forward: window " + window.shape_string() +
                     " but model expects (" +
                     std::to_string(model.config.seq_len) + "x" +
                     std::to_string(model.feature_dim) + ")");
  }
  DenseArray h = matmul(window, model.input_projection, counter);
  if (model.config.positional_encoding) {
    h = add(h, positional_encoding(model.config.seq_len, model.config.d_model));
  }
  return h;
}

EncoderOutput forward_impl(const TransformerModel& model,
                           const DenseArray& window, WindowCache* cache,
                           FlopCounter* counter) {
  DenseArray h = embed(model, window, counter);
  if (cache) cache->blocks.resize(model.blocks.size());
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    h = block_forward(h, model.blocks[b], model.config.num_heads,
                      cache ? &cache->blocks[b] : nullptr, counter);
  }
  EncoderOutput out;
  out.pooled = column_means(h);
  DenseArray logits = add_row_broadcast(
      matmul(out.pooled, model.head_weights, counter), model.head_bias);
  const DenseArray probs = softmax_rows(logits);
  out.probs = {probs(0, 0), probs(0, 1)};
  if (cache) cache->final_states = std::move(h);
  return out;
}

// Accumulates into `grad` the gradient of weight * cross-entropy for one
// window; returns the unweighted loss.
double backward_window(const TransformerModel& model, const DenseArray& window,
                       int label, double weight, TransformerModel& grad) {
  WindowCache cache;
  const EncoderOutput fwd = forward_impl(model, window, &cache, nullptr);
  const auto cls = static_cast<std::size_t>(label);
  const double loss = -std::log(std::max(fwd.probs[cls],
                                         std::numeric_limits<double>::min()));

  DenseArray dlogits(1, 2);
  for (std::size_t c = 0; c < 2; ++c)
    dlogits(0, c) = weight * (fwd.probs[c] - (c == cls ? 1.0 : 0.0));
  add_into(grad.head_weights, transposed_matmul(fwd.pooled, dlogits));
  add_into(grad.head_bias, dlogits);
  const DenseArray dpooled = matmul_transposed(dlogits, model.head_weights);

  const std::size_t seq_len = window.rows();
  const std::size_t d_model = model.config.d_model;
  DenseArray dh(seq_len, d_model);
  for (std::size_t i = 0; i < seq_len; ++i)
    for (std::size_t j = 0; j < d_model; ++j)
      dh(i, j) = dpooled(0, j) / static_cast<double>(seq_len);

  const std::size_t heads = model.config.num_heads;
  const std::size_t d_k = d_model / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d_k));

  for (std::size_t b = model.blocks.size(); b-- > 0;) {
    const EncoderBlock& block = model.blocks[b];
    const BlockCache& c = cache.blocks[b];
    EncoderBlock& g = grad.blocks[b];

    // Second sublayer: n2 = LN(n1 + ffn(n1)).
    const DenseArray dr2 =
        layer_norm_backward(dh, c.norm2, block.ln2_gain, g.ln2_gain, g.ln2_bias);
    add_into(g.w2, transposed_matmul(c.hidden, dr2));
    add_into(g.b2, column_sums(dr2));
    DenseArray dhidden = matmul_transposed(dr2, block.w2);
    for (std::size_t i = 0; i < dhidden.size(); ++i)
      if (c.hidden_pre.data()[i] <= 0.0) dhidden.data()[i] = 0.0;
    add_into(g.w1, transposed_matmul(c.n1, dhidden));
    add_into(g.b1, column_sums(dhidden));
    DenseArray dn1 = add(dr2, matmul_transposed(dhidden, block.w1));

    // First sublayer: n1 = LN(x + attention(x)).
    const DenseArray dr1 =
        layer_norm_backward(dn1, c.norm1, block.ln1_gain, g.ln1_gain, g.ln1_bias);
    DenseArray dx = dr1;
    add_into(g.w_o, transposed_matmul(c.concat, dr1));
    const DenseArray dconcat = matmul_transposed(dr1, block.w_o);
    for (std::size_t h = 0; h < heads; ++h) {
      const HeadCache& hc = c.heads[h];
      const DenseArray dout = slice_cols(dconcat, h * d_k, d_k);
      const DenseArray dprobs = matmul_transposed(dout, hc.v);
      const DenseArray dv = transposed_matmul(hc.probs, dout);
      DenseArray dlogit(hc.probs.rows(), hc.probs.cols());
      for (std::size_t i = 0; i < dlogit.rows(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < dlogit.cols(); ++j)
          dot += dprobs(i, j) * hc.probs(i, j);
        for (std::size_t j = 0; j < dlogit.cols(); ++j)
          dlogit(i, j) = hc.probs(i, j) * (dprobs(i, j) - dot) * inv_scale;
      }
      const DenseArray dq = matmul(dlogit, hc.k);
      const DenseArray dk = transposed_matmul(dlogit, hc.q);
      AttentionHead& gh = g.heads[h];
      add_into(gh.w_q, transposed_matmul(c.input, dq));
      add_into(gh.w_k, transposed_matmul(c.input, dk));
      add_into(gh.w_v, transposed_matmul(c.input, dv));
      add_into(dx, matmul_transposed(dq, block.heads[h].w_q));
      add_into(dx, matmul_transposed(dk, block.heads[h].w_k));
      add_into(dx, matmul_transposed(dv, block.heads[h].w_v));
    }
    dh = std::move(dx);
  }
  add_into(grad.input_projection, transposed_matmul(window, dh));
  return loss;
}

void check_labels(const std::vector<DenseArray>& windows,
                  const std::vector<int>& labels, const char* what) {
  if (windows.size() != labels.size()) {
    throw InputError(std::string(what) + ": " + std::to_string(windows.size()) +
                     " windows but " + std::to_string(labels.size()) +
                     " labels");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) {
      throw InputError(std::string(what) + ": labels must be 0 or 1");
    }
  }
}

}  // namespace

void TransformerConfig::validate() const {
  if (d_model == 0 || seq_len == 0 || d_ff == 0) {
    throw ConfigError("transformer: d_model, d_ff and seq_len must be positive");
  }
  if (num_heads == 0 || d_model % num_heads != 0) {
    throw ConfigError("transformer: " + std::to_string(num_heads) +
                      " heads do not divide d_model " + std::to_string(d_model));
  }
  if (positional_encoding && d_model % 2 != 0) {
    throw ConfigError("transformer: positional encoding needs an even d_model");
  }
}

std::size_t TransformerModel::parameter_count() const {
  std::size_t n = 0;
  for_each_parameter(*this, [&](const DenseArray& a) { n += a.size(); });
  return n;
}

void TransformerModel::validate() const {
  config.validate();
  const std::size_t d = config.d_model, dk = config.d_k(), ff = config.d_ff;
  auto expect = [](const DenseArray& a, std::size_t r, std::size_t c,
                   const char* name) {
    if (a.rows() != r || a.cols() != c) {
      throw ShapeError(std::string("transformer: ") + name + " is " +
                       a.shape_string() + ", expected (" + std::to_string(r) +
                       "x" + std::to_string(c) + ")");
    }
  };
  expect(input_projection, feature_dim, d, "input_projection");
  if (blocks.size() != config.num_blocks) {
    throw ShapeError("transformer: block count differs from config");
  }
  for (const auto& b : blocks) {
    if (b.heads.size() != config.num_heads) {
      throw ShapeError("transformer: head count differs from config");
    }
    for (const auto& h : b.heads) {
      expect(h.w_q, d, dk, "w_q");
      expect(h.w_k, d, dk, "w_k");
      expect(h.w_v, d, dk, "w_v");
    }
    expect(b.w_o, d, d, "w_o");
    expect(b.w1, d, ff, "w1");
    expect(b.b1, 1, ff, "b1");
    expect(b.w2, ff, d, "w2");
    expect(b.b2, 1, d, "b2");
    expect(b.ln1_gain, 1, d, "ln1_gain");
    expect(b.ln1_bias, 1, d, "ln1_bias");
    expect(b.ln2_gain, 1, d, "ln2_gain");
    expect(b.ln2_bias, 1, d, "ln2_bias");
  }
  expect(head_weights, d, 2, "head_weights");
  expect(head_bias, 1, 2, "head_bias");
}

void for_each_parameter(TransformerModel& model,
                        const std::function<void(DenseArray&)>& fn) {
  fn(model.input_projection);
  for (auto& b : model.blocks) {
    for (auto& h : b.heads) {
      fn(h.w_q);
      fn(h.w_k);
      fn(h.w_v);
    }
    fn(b.w_o);
    fn(b.ln1_gain);
    fn(b.ln1_bias);
    fn(b.w1);
    fn(b.b1);
    fn(b.w2);
    fn(b.b2);
    fn(b.ln2_gain);
    fn(b.ln2_bias);
  }
  fn(model.head_weights);
  fn(model.head_bias);
}

void for_each_parameter(const TransformerModel& model,
                        const std::function<void(const DenseArray&)>& fn) {
  for_each_parameter(const_cast<TransformerModel&>(model),
                     [&](DenseArray& a) { fn(a); });
}

TransformerModel zeros_like(const TransformerModel& model) {
  TransformerModel out = model;
  for_each_parameter(out, [](DenseArray& a) {
    std::fill(a.data().begin(), a.data().end(), 0.0);
  });
  return out;
}

std::vector<double> flatten(const TransformerModel& model) {
  std::vector<double> out;
  for_each_parameter(model, [&](const DenseArray& a) {
    out.insert(out.end(), a.data().begin(), a.data().end());
  });
  return out;
}

void unflatten(TransformerModel& model, std::span<const double> values) {
  if (values.size() != model.parameter_count()) {
    throw ShapeError("unflatten: " + std::to_string(values.size()) +
                     " values for " + std::to_string(model.parameter_count()) +
                     " parameters");
  }
  std::size_t pos = 0;
  for_each_parameter(model, [&](DenseArray& a) {
    for (double& v : a.data()) v = values[pos++];
  });
}

TransformerModel init_transformer(std::size_t feature_dim,
                                  const TransformerConfig& config) {
  config.validate();
  if (feature_dim == 0) throw ConfigError("transformer: feature_dim is zero");
  Rng rng(split_seed(config.seed, 0));
  const std::size_t d = config.d_model, dk = config.d_k(), ff = config.d_ff;
  TransformerModel model;
  model.config = config;
  model.feature_dim = feature_dim;
  model.input_projection = DenseArray(feature_dim, d);
  glorot(model.input_projection, rng);
  for (std::size_t b = 0; b < config.num_blocks; ++b) {
    EncoderBlock block;
    for (std::size_t h = 0; h < config.num_heads; ++h) {
      AttentionHead head{DenseArray(d, dk), DenseArray(d, dk),
                         DenseArray(d, dk)};
      glorot(head.w_q, rng);
      glorot(head.w_k, rng);
      glorot(head.w_v, rng);
      block.heads.push_back(std::move(head));
    }
    block.w_o = DenseArray(d, d);
    glorot(block.w_o, rng);
    block.ln1_gain = DenseArray(1, d, 1.0);
    block.ln1_bias = DenseArray(1, d);
    block.w1 = DenseArray(d, ff);
    glorot(block.w1, rng);
    block.b1 = DenseArray(1, ff);
    block.w2 = DenseArray(ff, d);
    glorot(block.w2, rng);
    block.b2 = DenseArray(1, d);
    block.ln2_gain = DenseArray(1, d, 1.0);
    block.ln2_bias = DenseArray(1, d);
    model.blocks.push_back(std::move(block));
  }
  model.head_weights = DenseArray(d, 2);
  glorot(model.head_weights, rng);
  model.head_bias = DenseArray(1, 2);
  return model;
}

DenseArray positional_encoding(std::size_t seq_len, std::size_t d_model) {
  if (seq_len == 0 || d_model == 0) {
    throw InputError("positional_encoding: seq_len and d_model must be positive");
  }
  if (d_model % 2 != 0) {
    throw InputError("positional_encoding: d_model " + std::to_string(d_model) +
                     " is odd");
  }
  DenseArray pe(seq_len, d_model);
  for (std::size_t pos = 0; pos < seq_len; ++pos) {
    for (std::size_t i = 0; i < d_model / 2; ++i) {
      const double rate = std::pow(10000.0, static_cast<double>(2 * i) /
                                                static_cast<double>(d_model));
      const double angle = static_cast<double>(pos) / rate;
      pe(pos, 2 * i) = std::sin(angle);
      pe(pos, 2 * i + 1) = std::cos(angle);
    }
  }
  return pe;
}

DenseArray scaled_dot_attention(const DenseArray& q, const DenseArray& k,
                                const DenseArray& v, FlopCounter* counter) {
  if (q.cols() != k.cols() || k.rows() != v.rows()) {
    throw ShapeError("scaled_dot_attention: q " + q.shape_string() + ", k " +
                     k.shape_string() + ", v " + v.shape_string());
  }
  return matmul(attention_probs(q, k, counter), v, counter);
}

DenseArray multi_head_attention(const DenseArray& x, const EncoderBlock& block,
                                std::size_t heads, FlopCounter* counter) {
  return attention_forward(x, block, heads, nullptr, counter);
}

DenseArray ffn_forward(const DenseArray& z, const DenseArray& w1,
                       const DenseArray& b1, const DenseArray& w2,
                       const DenseArray& b2, FlopCounter* counter) {
  DenseArray hidden = add_row_broadcast(matmul(z, w1, counter), b1);
  for (double& v : hidden.data()) v = v > 0.0 ? v : 0.0;
  return add_row_broadcast(matmul(hidden, w2, counter), b2);
}

DenseArray layer_norm(const DenseArray& x, const DenseArray& gain,
                      const DenseArray& bias) {
  return layer_norm_impl(x, gain, bias, nullptr);
}

EncoderOutput encoder_forward(const TransformerModel& model,
                              const DenseArray& window, FlopCounter* counter) {
  return forward_impl(model, window, nullptr, counter);
}

double anomaly_probability(const TransformerModel& model,
                           const DenseArray& window) {
  return encoder_forward(model, window).probs[1];
}

LossAndGradient classifier_loss_and_gradient(
    const TransformerModel& model, const std::vector<DenseArray>& windows,
    const std::vector<int>& labels) {
  check_labels(windows, labels, "classifier_loss_and_gradient");
  if (windows.empty()) throw InputError("classifier_loss_and_gradient: no windows");
  LossAndGradient out{0.0, zeros_like(model)};
  const double weight = 1.0 / static_cast<double>(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    out.loss += weight * backward_window(model, windows[i], labels[i], weight,
                                         out.gradient);
  }
  return out;
}

double classifier_loss(const TransformerModel& model,
                       const std::vector<DenseArray>& windows,
                       const std::vector<int>& labels) {
  check_labels(windows, labels, "classifier_loss");
  if (windows.empty()) throw InputError("classifier_loss: no windows");
  double total = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto probs = encoder_forward(model, windows[i]).probs;
    total -= std::log(std::max(probs[static_cast<std::size_t>(labels[i])],
                               std::numeric_limits<double>::min()));
  }
  return total / static_cast<double>(windows.size());
}

TrainingResult train_classifier(const TransformerModel& init,
                                const std::vector<DenseArray>& windows,
                                const std::vector<int>& labels,
                                const std::vector<DenseArray>& val_windows,
                                const std::vector<int>& val_labels) {
  init.validate();
  check_labels(windows, labels, "train_classifier");
  check_labels(val_windows, val_labels, "train_classifier (validation)");
  if (windows.empty()) throw InputError("train_classifier: no training windows");

  const TransformerConfig& cfg = init.config;
  TrainingResult result{init, 0, 0, 0.0, {}};
  const bool single_class =
      std::all_of(labels.begin(), labels.end(),
                  [&](int l) { return l == labels.front(); });
  if (single_class) {
    result.warnings.push_back("training labels contain a single class");
  }
  const bool use_val = !val_windows.empty();
  if (!use_val) {
    result.warnings.push_back(
        "no validation windows; early stopping monitors training loss");
  }
  auto monitored_loss = [&](const TransformerModel& m) {
    return use_val ? classifier_loss(m, val_windows, val_labels)
                   : classifier_loss(m, windows, labels);
  };
  result.best_validation_loss = monitored_loss(init);
  if (cfg.epochs == 0) return result;

  // Adam moments over the flattened parameter vector.
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  TransformerModel model = init;
  std::vector<double> params = flatten(model);
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  std::uint64_t step = 0;

  Rng rng(split_seed(cfg.seed, 1));
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::vector<DenseArray> xb;
      std::vector<int> yb;
      for (std::size_t i = start; i < end; ++i) {
        xb.push_back(windows[order[i]]);
        yb.push_back(labels[order[i]]);
      }
      const std::vector<double> grad =
          flatten(classifier_loss_and_gradient(model, xb, yb).gradient);
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * grad[i];
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        params[i] -= cfg.learning_rate * (m1[i] / c1) /
                     (std::sqrt(m2[i] / c2) + kAdamEps);
      }
      unflatten(model, params);
    }
    result.epochs_run = epoch;
    const double loss = monitored_loss(model);
    if (loss < result.best_validation_loss) {
      result.best_validation_loss = loss;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

}  // namespace netanomaly
