// cmdnn/pretraining.hpp

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

#ifndef CMDNN_PRETRAINING_HPP_
#define CMDNN_PRETRAINING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cmdnn/layers.hpp"
#include "cmdnn/network.hpp"
#include "cmdnn/tensor.hpp"

namespace cmdnn {

/* Greedy autoassociative pretraining
 * ----------------------------------
 * Each sigmoid hidden layer is trained, bottom-up, to reconstruct its own
 * input through a linear decoder (weight-tied to the encoder by default).
 * The decoder is thrown away afterwards; only the encoder weights feed the
 * supervised phase.
 */

struct PretrainConfig {
  std::size_t epochs_per_layer = 20;
  double lr = 0.05;
  double noise_std = 0.0;  // Gaussian input corruption; targets stay clean
  bool tied_decoder = true;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
};

struct PretrainLayerResult {
  double initial_mse = 0.0;  // reconstruction error before any update
  double final_mse = 0.0;    // reconstruction error after the last epoch
};

namespace detail {

/// Mean squared reconstruction error of x -> sigmoid(xW^T+b) -> hD+c over
/// all elements. D has the encoder's [out,in] shape.
inline double reconstruction_mse(const DenseLayer& encoder, const Tensor& decoder_w,
                                 const Tensor& decoder_c, const Tensor& x) {
  const std::size_t batch = x.dim(0), in = encoder.in_size(), out = encoder.out_size();
  double total = 0.0;
  std::vector<double> h(out, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xr = x.raw() + b * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = encoder.weights.raw() + o * in;
      double z = encoder.bias[o];
      for (std::size_t i = 0; i < in; ++i) z += xr[i] * wr[i];
      h[o] = apply_activation(ActivationKind::kSigmoid, z);
    }
    for (std::size_t i = 0; i < in; ++i) {
      double xhat = decoder_c[i];
      for (std::size_t o = 0; o < out; ++o) xhat += h[o] * decoder_w[o * in + i];
      const double diff = xhat - xr[i];
      total += diff * diff;
    }
  }
  return total / static_cast<double>(batch * in);
}

}  // namespace detail

inline PretrainLayerResult pretrain_layer(DenseLayer& encoder, const Tensor& inputs,
                                          const PretrainConfig& cfg,
                                          std::mt19937_64& rng) {
  if (inputs.rank() != 2 || inputs.dim(1) != encoder.in_size()) {
    throw std::invalid_argument("pretrain_layer: inputs " + inputs.shape_string() +
                                " do not match encoder " +
                                encoder.weights.shape_string());
  }
  if (!encoder.use_bias) {
    throw std::invalid_argument("pretrain_layer: encoder must carry a bias");
  }
  if (cfg.noise_std < 0.0) {
    throw std::invalid_argument("pretrain_layer: negative corruption level");
  }
  if (cfg.batch_size == 0) {
    throw std::invalid_argument("pretrain_layer: batch size must be >= 1");
  }

  const std::size_t n = inputs.dim(0), in = encoder.in_size(), out = encoder.out_size();
  Tensor decoder_w = encoder.weights;  // untied mode trains this copy separately
  Tensor decoder_c({in});

  PretrainLayerResult result;
  result.initial_mse = detail::reconstruction_mse(
      encoder, cfg.tied_decoder ? encoder.weights : decoder_w, decoder_c, inputs);
  result.final_mse = result.initial_mse;
  if (cfg.epochs_per_layer == 0) return result;

  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs_per_layer; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const std::size_t B = stop - start;

      Tensor xb({B, in});       // corrupted encoder input
      Tensor target({B, in});   // clean reconstruction target
      for (std::size_t b = 0; b < B; ++b) {
        const double* src = inputs.raw() + order[start + b] * in;
        std::copy(src, src + in, target.raw() + b * in);
        double* dst = xb.raw() + b * in;
        for (std::size_t i = 0; i < in; ++i) {
          dst[i] = src[i] + (cfg.noise_std > 0.0 ? cfg.noise_std * noise(rng) : 0.0);
        }
      }

      const Tensor& dec_w = cfg.tied_decoder ? encoder.weights : decoder_w;
      Tensor z({B, out}), h({B, out}), xhat({B, in});
      for (std::size_t b = 0; b < B; ++b) {
        const double* xr = xb.raw() + b * in;
        for (std::size_t o = 0; o < out; ++o) {
          const double* wr = encoder.weights.raw() + o * in;
          double acc = encoder.bias[o];
          for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
          z.at(b, o) = acc;
          h.at(b, o) = apply_activation(ActivationKind::kSigmoid, acc);
        }
        for (std::size_t i = 0; i < in; ++i) {
          double acc = decoder_c[i];
          for (std::size_t o = 0; o < out; ++o) acc += h.at(b, o) * dec_w[o * in + i];
          xhat.at(b, i) = acc;
        }
      }

      // d = dMSE/dxhat; the tied gradient adds the decoder and encoder paths.
      const double scale = 2.0 / static_cast<double>(B * in);
      Tensor d({B, in});
      for (std::size_t j = 0; j < d.size(); ++j) {
        d[j] = scale * (xhat[j] - target[j]);
      }
      Tensor grad_dec({out, in}), grad_c({in}), grad_w({out, in}), grad_b({out});
      for (std::size_t b = 0; b < B; ++b) {
        const double* dr = d.raw() + b * in;
        const double* xr = xb.raw() + b * in;
        for (std::size_t i = 0; i < in; ++i) grad_c[i] += dr[i];
        for (std::size_t o = 0; o < out; ++o) {
          const double hv = h.at(b, o);
          double dh = 0.0;
          const double* dwr = dec_w.raw() + o * in;
          double* gdr = grad_dec.raw() + o * in;
          for (std::size_t i = 0; i < in; ++i) {
            gdr[i] += hv * dr[i];
            dh += dr[i] * dwr[i];
          }
          const double dz = dh * hv * (1.0 - hv);
          grad_b[o] += dz;
          double* gwr = grad_w.raw() + o * in;
          for (std::size_t i = 0; i < in; ++i) gwr[i] += dz * xr[i];
        }
      }

      if (cfg.tied_decoder) {
        for (std::size_t j = 0; j < grad_w.size(); ++j) {
          encoder.weights[j] -= cfg.lr * (grad_w[j] + grad_dec[j]);
        }
      } else {
        for (std::size_t j = 0; j < grad_w.size(); ++j) {
          encoder.weights[j] -= cfg.lr * grad_w[j];
          decoder_w[j] -= cfg.lr * grad_dec[j];
        }
      }
      for (std::size_t o = 0; o < out; ++o) encoder.bias[o] -= cfg.lr * grad_b[o];
      for (std::size_t i = 0; i < in; ++i) decoder_c[i] -= cfg.lr * grad_c[i];
    }
  }

  result.final_mse = detail::reconstruction_mse(
      encoder, cfg.tied_decoder ? encoder.weights : decoder_w, decoder_c, inputs);
  return result;
}

inline PretrainLayerResult pretrain_layer(DenseLayer& encoder, const Tensor& inputs,
                                          const PretrainConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  return pretrain_layer(encoder, inputs, cfg, rng);
}

/// Pretrain every hidden layer of a sigmoid stack bottom-up, each on the
/// previous layer's activations. The network must be an alternation of
/// dense and sigmoid-activation nodes ending in the dense output layer,
/// which stays at its random initialization.
inline void pretrain_stack(Network& net, const Tensor& inputs, const PretrainConfig& cfg,
                           std::ostream* log = nullptr) {
  std::vector<DenseLayer*> hidden;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    LayerNode& node = net.nodes[i];
    if (auto* dense = std::get_if<DenseLayer>(&node)) {
      if (i + 1 == net.nodes.size()) break;  // output layer
      const auto* act = std::get_if<ActivationLayer>(&net.nodes[i + 1]);
      if (!act || act->kind != ActivationKind::kSigmoid) {
        throw std::invalid_argument(
            "pretrain_stack: hidden layer " + std::to_string(i) +
            " is not followed by a sigmoid activation");
      }
      hidden.push_back(dense);
      ++i;
    } else if (std::get_if<ActivationLayer>(&node)) {
      throw std::invalid_argument("pretrain_stack: stray activation at node " +
                                  std::to_string(i));
    } else {
      throw std::invalid_argument(
          "pretrain_stack: only dense sigmoid stacks can be pretrained (node " +
          std::to_string(i) + " is not a dense layer)");
    }
  }
  if (net.nodes.empty() || !std::get_if<DenseLayer>(&net.nodes.back())) {
    throw std::invalid_argument("pretrain_stack: network must end in a dense output layer");
  }

  std::mt19937_64 rng(cfg.seed);
  Tensor cur = inputs;
  for (std::size_t li = 0; li < hidden.size(); ++li) {
    DenseLayer* layer = hidden[li];
    const PretrainLayerResult r = pretrain_layer(*layer, cur, cfg, rng);
    if (log) {
      *log << "pretrain layer " << li << " [" << layer->in_size() << "->"
           << layer->out_size() << "] reconstruction mse " << r.initial_mse << " -> "
           << r.final_mse << '\n';
    }
    cur = activation_forward(ActivationKind::kSigmoid, dense_forward(*layer, cur));
  }
}

}  // namespace cmdnn

#endif  // CMDNN_PRETRAINING_HPP_
