// cmdnn/layers.hpp

// Copyright 2026  The cmdnn authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CMDNN_LAYERS_HPP_
#define CMDNN_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdnn/tensor.hpp"

namespace cmdnn {

// Every layer keeps its parameters read-only during a pass; whatever the
// backward pass needs is recorded in a per-pass cache object owned by the
// caller. One layer instance may therefore serve concurrent passes.

/* Activations
 * -----------
 */

enum class ActivationKind { kSigmoid, kRelu, kSoftplus, kIdentity };

inline const char* activation_name(ActivationKind k) {
  switch (k) {
    case ActivationKind::kSigmoid: return "sigmoid";
    case ActivationKind::kRelu: return "relu";
    case ActivationKind::kSoftplus: return "softplus";
    case ActivationKind::kIdentity: return "identity";
  }
  return "?";
}

inline ActivationKind activation_from_name(const std::string& s) {
  if (s == "sigmoid") return ActivationKind::kSigmoid;
  if (s == "relu") return ActivationKind::kRelu;
  if (s == "softplus") return ActivationKind::kSoftplus;
  if (s == "identity") return ActivationKind::kIdentity;
  throw std::invalid_argument("unknown activation: " + s);
}

inline double apply_activation(ActivationKind k, double x) {
  switch (k) {
    case ActivationKind::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::kRelu:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::kSoftplus:
      // ln(1+e^x); large x switches to the stable branch x + ln(1+e^-x).
      return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    case ActivationKind::kIdentity:
      return x;
  }
  return x;
}

/// Derivative with respect to the pre-activation. relu'(0) is defined as 0.
inline double activation_derivative(ActivationKind k, double x) {
  switch (k) {
    case ActivationKind::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ActivationKind::kRelu:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::kSoftplus:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::kIdentity:
      return 1.0;
  }
  return 1.0;
}

inline Tensor activation_forward(ActivationKind k, const Tensor& z) {
  return elementwise_map(z, [k](double x) { return apply_activation(k, x); });
}

/* Dense layer
 * -----------
 */

struct DenseLayer {
  Tensor weights;  // [out, in]
  Tensor bias;     // [out]
  bool use_bias = true;

  DenseLayer() = default;

  DenseLayer(Tensor w, Tensor b, bool with_bias) : use_bias(with_bias) {
    if (w.rank() != 2) {
      throw std::invalid_argument("DenseLayer: weights must be rank-2, got " +
                                  w.shape_string());
    }
    if (b.rank() != 1 || b.dim(0) != w.dim(0)) {
      throw std::invalid_argument("DenseLayer: bias shape " + b.shape_string() +
                                  " does not match weights " + w.shape_string());
    }
    if (!with_bias) {
      for (double v : b.data()) {
        if (v != 0.0) {
          throw std::invalid_argument(
              "DenseLayer: use_bias=false requires an all-zero bias");
        }
      }
    }
    weights = std::move(w);
    bias = std::move(b);
  }

  std::size_t out_size() const { return weights.dim(0); }
  std::size_t in_size() const { return weights.dim(1); }
};

struct DenseCache {
  Tensor input;  // [batch, in]
  bool valid = false;
};

/// z = x * W^T + b (b omitted when use_bias is false). x is [batch, in].
inline Tensor dense_forward(const DenseLayer& layer, const Tensor& x,
                            DenseCache* cache = nullptr) {
  if (x.rank() != 2 || x.dim(1) != layer.in_size()) {
    throw std::invalid_argument("dense_forward: input " + x.shape_string() +
                                " does not match weights " +
                                layer.weights.shape_string());
  }
  const std::size_t batch = x.dim(0), in = layer.in_size(), out = layer.out_size();
  Tensor z({batch, out});
  const double* px = x.raw();
  const double* pw = layer.weights.raw();
  double* pz = z.raw();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xr = px + b * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = pw + o * in;
      double acc = layer.use_bias ? layer.bias[o] : 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
      pz[b * out + o] = acc;
    }
  }
  if (cache) {
    cache->input = x;
    cache->valid = true;
  }
  return z;
}

struct DenseGrads {
  Tensor weights;  // [out, in]
  Tensor bias;     // [out]; zero when use_bias is false
  Tensor input;    // [batch, in]
};

inline DenseGrads dense_backward(const DenseLayer& layer, const DenseCache& cache,
                                 const Tensor& upstream) {
  if (!cache.valid) {
    throw std::logic_error("dense_backward: no cached forward pass");
  }
  const Tensor& x = cache.input;
  const std::size_t batch = x.dim(0), in = layer.in_size(), out = layer.out_size();
  if (upstream.rank() != 2 || upstream.dim(0) != batch || upstream.dim(1) != out) {
    throw std::invalid_argument("dense_backward: upstream " + upstream.shape_string() +
                                " does not match output [" + std::to_string(batch) +
                                "," + std::to_string(out) + "]");
  }
  DenseGrads g{Tensor({out, in}), Tensor({out}), Tensor({batch, in})};
  const double* pu = upstream.raw();
  const double* px = x.raw();
  const double* pw = layer.weights.raw();
  double* pdw = g.weights.raw();
  double* pdx = g.input.raw();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* ur = pu + b * out;
    const double* xr = px + b * in;
    double* dxr = pdx + b * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double u = ur[o];
      if (layer.use_bias) g.bias[o] += u;
      double* dwr = pdw + o * in;
      const double* wr = pw + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        dwr[i] += u * xr[i];
        dxr[i] += u * wr[i];
      }
    }
  }
  if (!layer.use_bias) {
    // bias gradient is still accumulated shape-wise but must stay zero
    std::fill(g.bias.data().begin(), g.bias.data().end(), 0.0);
  }
  return g;
}

/* Maxout block
 * ------------
 * A fully connected layer whose outputs are grouped in k consecutive
 * pre-activations; the block output is the per-group maximum. The gradient
 * flows only to the winning pre-activation of each group.
 */

struct MaxoutBlock {
  DenseLayer linear;  // out = units * group_size
  std::size_t group_size = 2;

  MaxoutBlock() = default;

  MaxoutBlock(DenseLayer lin, std::size_t k) : group_size(k) {
    if (k < 1) throw std::invalid_argument("MaxoutBlock: group size must be >= 1");
    if (lin.out_size() % k != 0) {
      std::ostringstream msg;
      msg << "MaxoutBlock: linear width " << lin.out_size()
          << " not divisible by group size " << k;
      throw std::invalid_argument(msg.str());
    }
    linear = std::move(lin);
  }

  std::size_t units() const { return linear.out_size() / group_size; }
  std::size_t in_size() const { return linear.in_size(); }
};

struct MaxoutCache {
  DenseCache dense;
  std::vector<std::size_t> argmax;  // [batch * units] in-group winner offsets
  bool valid = false;
};

inline Tensor maxout_forward(const MaxoutBlock& block, const Tensor& x,
                             MaxoutCache* cache = nullptr) {
  DenseCache dense_cache;
  const Tensor z = dense_forward(block.linear, x, cache ? &cache->dense : &dense_cache);
  const std::size_t batch = z.dim(0);
  const std::size_t units = block.units();
  const std::size_t k = block.group_size;
  Tensor y({batch, units});
  std::vector<std::size_t> argmax(batch * units, 0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t u = 0; u < units; ++u) {
      const std::size_t base = b * units * k + u * k;
      std::size_t best = 0;
      double best_val = z[base];
      for (std::size_t j = 1; j < k; ++j) {
        if (z[base + j] > best_val) {
          best_val = z[base + j];
          best = j;
        }
      }
      y.at(b, u) = best_val;
      argmax[b * units + u] = best;
    }
  }
  if (cache) {
    cache->argmax = std::move(argmax);
    cache->valid = true;
  }
  return y;
}

struct MaxoutGrads {
  Tensor weights;
  Tensor bias;
  Tensor input;
};

inline MaxoutGrads maxout_backward(const MaxoutBlock& block, const MaxoutCache& cache,
                                   const Tensor& upstream) {
  if (!cache.valid) {
    throw std::logic_error("maxout_backward: no cached forward pass");
  }
  const std::size_t batch = upstream.dim(0);
  const std::size_t units = block.units();
  const std::size_t k = block.group_size;
  if (upstream.rank() != 2 || upstream.dim(1) != units ||
      cache.argmax.size() != batch * units) {
    throw std::invalid_argument("maxout_backward: upstream " + upstream.shape_string() +
                                " does not match cached forward of " +
                                std::to_string(units) + " units");
  }
  // Route the upstream gradient to the argmax pre-activation of each group.
  Tensor dz({batch, units * k});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t u = 0; u < units; ++u) {
      dz.at(b, u * k + cache.argmax[b * units + u]) = upstream.at(b, u);
    }
  }
  DenseGrads g = dense_backward(block.linear, cache.dense, dz);
  return MaxoutGrads{std::move(g.weights), std::move(g.bias), std::move(g.input)};
}

/* Convolution
 * -----------
 * Valid (no padding) cross-correlation on inputs laid out as
 * [batch, channels, frequency, time]. kh runs along the frequency axis and
 * kw along the time axis.
 */

enum class AxisMode { kTimeOnly, kFrequencyOnly, kBoth };

inline const char* axis_mode_name(AxisMode m) {
  switch (m) {
    case AxisMode::kTimeOnly: return "T";
    case AxisMode::kFrequencyOnly: return "F";
    case AxisMode::kBoth: return "TF";
  }
  return "?";
}

inline AxisMode axis_mode_from_name(const std::string& s) {
  if (s == "T") return AxisMode::kTimeOnly;
  if (s == "F") return AxisMode::kFrequencyOnly;
  if (s == "TF" || s == "T&F" || s == "TandF") return AxisMode::kBoth;
  throw std::invalid_argument("unknown weight-sharing axis: " + s);
}

struct ConvLayer {
  Tensor kernels;  // [out_channels, in_channels, kh, kw]
  AxisMode axis_mode = AxisMode::kBoth;

  ConvLayer() = default;

  ConvLayer(Tensor k, AxisMode mode) : axis_mode(mode) {
    if (k.rank() != 4) {
      throw std::invalid_argument("ConvLayer: kernels must be rank-4, got " +
                                  k.shape_string());
    }
    if (mode == AxisMode::kTimeOnly && k.dim(2) != 1) {
      throw std::invalid_argument("ConvLayer: time-only sharing requires kh == 1, got " +
                                  k.shape_string());
    }
    if (mode == AxisMode::kFrequencyOnly && k.dim(3) != 1) {
      throw std::invalid_argument(
          "ConvLayer: frequency-only sharing requires kw == 1, got " + k.shape_string());
    }
    kernels = std::move(k);
  }

  std::size_t out_channels() const { return kernels.dim(0); }
  std::size_t in_channels() const { return kernels.dim(1); }
  std::size_t kernel_h() const { return kernels.dim(2); }
  std::size_t kernel_w() const { return kernels.dim(3); }
};

struct ConvCache {
  Tensor input;  // [batch, in_c, F, T]
  bool valid = false;
};

inline Tensor conv_forward(const ConvLayer& layer, const Tensor& x,
                           ConvCache* cache = nullptr) {
  if (x.rank() != 4 || x.dim(1) != layer.in_channels()) {
    throw std::invalid_argument("conv_forward: input " + x.shape_string() +
                                " does not match kernels " +
                                layer.kernels.shape_string());
  }
  const std::size_t batch = x.dim(0), ic = x.dim(1), F = x.dim(2), T = x.dim(3);
  const std::size_t oc = layer.out_channels(), kh = layer.kernel_h(), kw = layer.kernel_w();
  if (kh > F || kw > T) {
    throw std::invalid_argument("conv_forward: kernel " + layer.kernels.shape_string() +
                                " exceeds input extents " + x.shape_string());
  }
  const std::size_t Fo = F - kh + 1, To = T - kw + 1;
  Tensor y({batch, oc, Fo, To});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < oc; ++o) {
      for (std::size_t f = 0; f < Fo; ++f) {
        for (std::size_t t = 0; t < To; ++t) {
          double acc = 0.0;
          for (std::size_t c = 0; c < ic; ++c) {
            for (std::size_t dh = 0; dh < kh; ++dh) {
              const double* xrow = x.raw() + ((b * ic + c) * F + (f + dh)) * T + t;
              const double* krow = layer.kernels.raw() + ((o * ic + c) * kh + dh) * kw;
              for (std::size_t dw = 0; dw < kw; ++dw) acc += xrow[dw] * krow[dw];
            }
          }
          y.at(b, o, f, t) = acc;
        }
      }
    }
  }
  if (cache) {
    cache->input = x;
    cache->valid = true;
  }
  return y;
}

struct ConvGrads {
  Tensor kernels;
  Tensor input;
};

inline ConvGrads conv_backward(const ConvLayer& layer, const ConvCache& cache,
                               const Tensor& upstream) {
  if (!cache.valid) {
    throw std::logic_error("conv_backward: no cached forward pass");
  }
  const Tensor& x = cache.input;
  const std::size_t batch = x.dim(0), ic = x.dim(1), F = x.dim(2), T = x.dim(3);
  const std::size_t oc = layer.out_channels(), kh = layer.kernel_h(), kw = layer.kernel_w();
  const std::size_t Fo = F - kh + 1, To = T - kw + 1;
  if (upstream.rank() != 4 || upstream.dim(0) != batch || upstream.dim(1) != oc ||
      upstream.dim(2) != Fo || upstream.dim(3) != To) {
    throw std::invalid_argument("conv_backward: upstream " + upstream.shape_string() +
                                " does not match forward output");
  }
  ConvGrads g{Tensor({oc, ic, kh, kw}), Tensor({batch, ic, F, T})};
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < oc; ++o) {
      for (std::size_t f = 0; f < Fo; ++f) {
        for (std::size_t t = 0; t < To; ++t) {
          const double u = upstream.at(b, o, f, t);
          if (u == 0.0) continue;
          for (std::size_t c = 0; c < ic; ++c) {
            for (std::size_t dh = 0; dh < kh; ++dh) {
              const double* xrow = x.raw() + ((b * ic + c) * F + (f + dh)) * T + t;
              double* dxrow = g.input.raw() + ((b * ic + c) * F + (f + dh)) * T + t;
              double* dkrow = g.kernels.raw() + ((o * ic + c) * kh + dh) * kw;
              const double* krow = layer.kernels.raw() + ((o * ic + c) * kh + dh) * kw;
              for (std::size_t dw = 0; dw < kw; ++dw) {
                dkrow[dw] += u * xrow[dw];
                dxrow[dw] += u * krow[dw];
              }
            }
          }
        }
      }
    }
  }
  return g;
}

/* Max pooling
 * -----------
 */

struct MaxPoolLayer {
  std::size_t pool_h = 1, pool_w = 1;
  std::size_t stride_h = 1, stride_w = 1;

  MaxPoolLayer() = default;

  MaxPoolLayer(std::size_t ph, std::size_t pw)
      : pool_h(ph), pool_w(pw), stride_h(ph), stride_w(pw) {
    if (ph < 1 || pw < 1) {
      throw std::invalid_argument("MaxPoolLayer: pool sizes must be >= 1");
    }
  }

  static std::size_t out_extent(std::size_t in, std::size_t pool, std::size_t stride) {
    return (in - pool) / stride + 1;
  }
};

struct MaxPoolCache {
  std::vector<std::size_t> argmax;  // flat input offsets of each window maximum
  std::vector<std::size_t> in_shape;
  bool valid = false;
};

inline Tensor maxpool_forward(const MaxPoolLayer& layer, const Tensor& x,
                              MaxPoolCache* cache = nullptr) {
  if (x.rank() != 4) {
    throw std::invalid_argument("maxpool_forward: expected rank-4 input, got " +
                                x.shape_string());
  }
  const std::size_t batch = x.dim(0), ch = x.dim(1), F = x.dim(2), T = x.dim(3);
  if (layer.pool_h > F || layer.pool_w > T) {
    std::ostringstream msg;
    msg << "maxpool_forward: pool " << layer.pool_h << "x" << layer.pool_w
        << " exceeds input extents " << x.shape_string();
    throw std::invalid_argument(msg.str());
  }
  const std::size_t Fo = MaxPoolLayer::out_extent(F, layer.pool_h, layer.stride_h);
  const std::size_t To = MaxPoolLayer::out_extent(T, layer.pool_w, layer.stride_w);
  Tensor y({batch, ch, Fo, To});
  std::vector<std::size_t> argmax(batch * ch * Fo * To, 0);
  std::size_t out_idx = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t f = 0; f < Fo; ++f) {
        for (std::size_t t = 0; t < To; ++t) {
          const std::size_t f0 = f * layer.stride_h, t0 = t * layer.stride_w;
          std::size_t best = ((b * ch + c) * F + f0) * T + t0;
          double best_val = x[best];
          for (std::size_t dh = 0; dh < layer.pool_h; ++dh) {
            for (std::size_t dw = 0; dw < layer.pool_w; ++dw) {
              const std::size_t idx = ((b * ch + c) * F + f0 + dh) * T + t0 + dw;
              if (x[idx] > best_val) {
                best_val = x[idx];
                best = idx;
              }
            }
          }
          y[out_idx] = best_val;
          argmax[out_idx] = best;
          ++out_idx;
        }
      }
    }
  }
  if (cache) {
    cache->argmax = std::move(argmax);
    cache->in_shape = x.shape();
    cache->valid = true;
  }
  return y;
}

inline Tensor maxpool_backward(const MaxPoolLayer& layer, const MaxPoolCache& cache,
                               const Tensor& upstream) {
  (void)layer;
  if (!cache.valid) {
    throw std::logic_error("maxpool_backward: no cached forward pass");
  }
  if (upstream.size() != cache.argmax.size()) {
    throw std::invalid_argument("maxpool_backward: upstream " + upstream.shape_string() +
                                " does not match cached forward");
  }
  Tensor dx(cache.in_shape);
  for (std::size_t i = 0; i < cache.argmax.size(); ++i) {
    dx[cache.argmax[i]] += upstream[i];
  }
  return dx;
}

/* Dropout
 * -------
 * Training keeps each unit with probability p and zeroes the rest; the
 * surviving units pass through unscaled. At test time the outgoing weights
 * of the dropped-out layer are multiplied by p instead.
 */

struct DropoutSpec {
  double keep_prob = 1.0;

  DropoutSpec() = default;

  explicit DropoutSpec(double p) : keep_prob(p) {
    if (!(p > 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "DropoutSpec: keep probability " << p << " outside (0,1]";
      throw std::invalid_argument(msg.str());
    }
  }
};

struct DropoutResult {
  Tensor output;
  Tensor mask;  // 0/1 per element
};

/// p == 1 is a strict no-op: the mask is all-ones and no random numbers are
/// drawn, so such a layer never perturbs the caller's RNG stream.
inline DropoutResult dropout_train_forward(const DropoutSpec& spec, const Tensor& x,
                                           std::mt19937_64& rng) {
  if (!(spec.keep_prob > 0.0 && spec.keep_prob <= 1.0)) {
    std::ostringstream msg;
    msg << "dropout_train_forward: keep probability " << spec.keep_prob
        << " outside (0,1]";
    throw std::invalid_argument(msg.str());
  }
  DropoutResult r{x, Tensor(x.shape())};
  if (spec.keep_prob == 1.0) {
    std::fill(r.mask.data().begin(), r.mask.data().end(), 1.0);
    return r;
  }
  std::bernoulli_distribution keep(spec.keep_prob);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool kept = keep(rng);
    r.mask[i] = kept ? 1.0 : 0.0;
    if (!kept) r.output[i] = 0.0;
  }
  return r;
}

/// W_test = p * W: the inference-time correction for a layer whose inputs
/// were dropped out with keep probability p during training.
inline Tensor dropout_scale_for_inference(const Tensor& weights, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    std::ostringstream msg;
    msg << "dropout_scale_for_inference: keep probability " << p << " outside (0,1]";
    throw std::invalid_argument(msg.str());
  }
  return elementwise_map(weights, [p](double w) { return p * w; });
}

/* Softmax + cross-entropy output
 * ------------------------------
 */

struct SoftmaxXent {
  double loss = 0.0;
  Tensor grad;  // dL/dlogits, [batch, classes]
};

/// Mean negative log softmax probability of the labels; the gradient is
/// (softmax - one_hot) / batch. Stabilized by row-max subtraction.
inline SoftmaxXent softmax_xent(const Tensor& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2) {
    throw std::invalid_argument("softmax_xent: logits must be rank-2, got " +
                                logits.shape_string());
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    throw std::invalid_argument("softmax_xent: " + std::to_string(labels.size()) +
                                " labels for batch of " + std::to_string(batch));
  }
  SoftmaxXent out;
  out.grad = Tensor({batch, classes});
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      std::ostringstream msg;
      msg << "softmax_xent: label " << label << " out of range [0," << classes << ")";
      throw std::out_of_range(msg.str());
    }
    const double* row = logits.raw() + b * classes;
    double mx = row[0];
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - mx);
    const double log_denom = std::log(denom);
    total += -(row[label] - mx - log_denom);
    double* grow = out.grad.raw() + b * classes;
    for (std::size_t c = 0; c < classes; ++c) {
      grow[c] = std::exp(row[c] - mx) / denom / static_cast<double>(batch);
    }
    grow[label] -= 1.0 / static_cast<double>(batch);
  }
  out.loss = total / static_cast<double>(batch);
  return out;
}

}  // namespace cmdnn

#endif  // CMDNN_LAYERS_HPP_
