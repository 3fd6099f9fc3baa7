// cmdnn/network.hpp

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

#ifndef CMDNN_NETWORK_HPP_
#define CMDNN_NETWORK_HPP_

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cmdnn/layers.hpp"
#include "cmdnn/tensor.hpp"

namespace cmdnn {

/* Node kinds
 * ----------
 * A network is a flat pipeline of nodes. Parameterized layers reuse the
 * structs from layers.hpp; the wrappers below cover the parameter-free ones.
 */

struct ActivationLayer {
  ActivationKind kind = ActivationKind::kIdentity;
};

struct DropoutLayer {
  double keep_prob = 1.0;
};

struct FlattenLayer {};

using LayerNode = std::variant<DenseLayer, ActivationLayer, MaxoutBlock, ConvLayer,
                               MaxPoolLayer, DropoutLayer, FlattenLayer>;

struct ActivationCache {
  Tensor input;
  bool valid = false;
};

struct DropoutCache {
  Tensor mask;
  bool valid = false;
};

struct FlattenCache {
  std::vector<std::size_t> in_shape;
  bool valid = false;
};

using NodeCache = std::variant<std::monostate, DenseCache, ActivationCache, MaxoutCache,
                               ConvCache, MaxPoolCache, DropoutCache, FlattenCache>;

/// All per-pass state for one forward pass. Layers themselves stay const
/// during a pass; two PassContexts may run through the same Network at once.
struct PassContext {
  std::vector<NodeCache> caches;
  bool valid = false;
};

struct Network {
  std::vector<LayerNode> nodes;
  std::vector<std::size_t> input_shape;  // per-example shape, no batch axis
  std::size_t class_count = 30;
};

enum class PassMode { kTrain, kInference };

inline Tensor flatten_batch(const Tensor& x) {
  if (x.rank() < 2) {
    throw std::invalid_argument("flatten: expected a batched input, got " +
                                x.shape_string());
  }
  std::size_t per_example = 1;
  for (std::size_t a = 1; a < x.rank(); ++a) per_example *= x.dim(a);
  return Tensor({x.dim(0), per_example}, x.data());
}

/// Run the pipeline. In kTrain mode dropout layers draw masks from rng; in
/// kInference mode they pass the input through untouched (the weight
/// rescaling that replaces them lives in inference_network below).
inline Tensor network_forward(const Network& net, const Tensor& x, PassMode mode,
                              std::mt19937_64* rng = nullptr,
                              PassContext* ctx = nullptr) {
  if (mode == PassMode::kTrain && rng == nullptr) {
    bool needs_rng = false;
    for (const auto& node : net.nodes) {
      if (const auto* d = std::get_if<DropoutLayer>(&node)) {
        if (d->keep_prob < 1.0) needs_rng = true;
      }
    }
    if (needs_rng) {
      throw std::invalid_argument(
          "network_forward: training pass through dropout needs an RNG");
    }
  }
  if (ctx) {
    ctx->caches.assign(net.nodes.size(), NodeCache{});
    ctx->valid = false;
  }
  Tensor cur = x;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const LayerNode& node = net.nodes[i];
    if (const auto* dense = std::get_if<DenseLayer>(&node)) {
      DenseCache cache;
      cur = dense_forward(*dense, cur, ctx ? &cache : nullptr);
      if (ctx) ctx->caches[i] = std::move(cache);
    } else if (const auto* act = std::get_if<ActivationLayer>(&node)) {
      if (ctx) {
        ActivationCache cache{cur, true};
        ctx->caches[i] = std::move(cache);
      }
      cur = activation_forward(act->kind, cur);
    } else if (const auto* mo = std::get_if<MaxoutBlock>(&node)) {
      MaxoutCache cache;
      cur = maxout_forward(*mo, cur, ctx ? &cache : nullptr);
      if (ctx) ctx->caches[i] = std::move(cache);
    } else if (const auto* conv = std::get_if<ConvLayer>(&node)) {
      ConvCache cache;
      cur = conv_forward(*conv, cur, ctx ? &cache : nullptr);
      if (ctx) ctx->caches[i] = std::move(cache);
    } else if (const auto* pool = std::get_if<MaxPoolLayer>(&node)) {
      MaxPoolCache cache;
      cur = maxpool_forward(*pool, cur, ctx ? &cache : nullptr);
      if (ctx) ctx->caches[i] = std::move(cache);
    } else if (const auto* drop = std::get_if<DropoutLayer>(&node)) {
      if (mode == PassMode::kTrain && drop->keep_prob < 1.0) {
        DropoutResult r = dropout_train_forward(DropoutSpec(drop->keep_prob), cur, *rng);
        cur = std::move(r.output);
        if (ctx) ctx->caches[i] = DropoutCache{std::move(r.mask), true};
      } else if (ctx) {
        Tensor ones(cur.shape());
        std::fill(ones.data().begin(), ones.data().end(), 1.0);
        ctx->caches[i] = DropoutCache{std::move(ones), true};
      }
    } else if (std::get_if<FlattenLayer>(&node)) {
      if (ctx) ctx->caches[i] = FlattenCache{cur.shape(), true};
      cur = flatten_batch(cur);
    }
  }
  if (ctx) ctx->valid = true;
  return cur;
}

struct BackwardResult {
  std::vector<Tensor> param_grads;  // aligned with network_params order
  Tensor input_grad;
};

/// Pointers to every trainable tensor, in a stable front-to-back order:
/// dense -> weights then (if used) bias; maxout -> linear weights then bias;
/// conv -> kernels.
inline std::vector<Tensor*> network_params(Network& net) {
  std::vector<Tensor*> params;
  for (auto& node : net.nodes) {
    if (auto* dense = std::get_if<DenseLayer>(&node)) {
      params.push_back(&dense->weights);
      if (dense->use_bias) params.push_back(&dense->bias);
    } else if (auto* mo = std::get_if<MaxoutBlock>(&node)) {
      params.push_back(&mo->linear.weights);
      if (mo->linear.use_bias) params.push_back(&mo->linear.bias);
    } else if (auto* conv = std::get_if<ConvLayer>(&node)) {
      params.push_back(&conv->kernels);
    }
  }
  return params;
}

/// The weight matrices subject to row-norm constraints: dense and maxout
/// weight matrices plus conv kernel banks (rows = output channels). Biases
/// are excluded.
inline std::vector<Tensor*> network_weight_matrices(Network& net) {
  std::vector<Tensor*> mats;
  for (auto& node : net.nodes) {
    if (auto* dense = std::get_if<DenseLayer>(&node)) {
      mats.push_back(&dense->weights);
    } else if (auto* mo = std::get_if<MaxoutBlock>(&node)) {
      mats.push_back(&mo->linear.weights);
    } else if (auto* conv = std::get_if<ConvLayer>(&node)) {
      mats.push_back(&conv->kernels);
    }
  }
  return mats;
}

inline BackwardResult network_backward(const Network& net, const PassContext& ctx,
                                       const Tensor& loss_grad) {
  if (!ctx.valid || ctx.caches.size() != net.nodes.size()) {
    throw std::logic_error("network_backward: context does not hold a forward pass");
  }
  Tensor cur = loss_grad;
  std::vector<Tensor> rev_grads;
  for (std::size_t ri = net.nodes.size(); ri-- > 0;) {
    const LayerNode& node = net.nodes[ri];
    if (const auto* dense = std::get_if<DenseLayer>(&node)) {
      const auto& cache = std::get<DenseCache>(ctx.caches[ri]);
      DenseGrads g = dense_backward(*dense, cache, cur);
      if (dense->use_bias) rev_grads.push_back(std::move(g.bias));
      rev_grads.push_back(std::move(g.weights));
      cur = std::move(g.input);
    } else if (const auto* act = std::get_if<ActivationLayer>(&node)) {
      const auto& cache = std::get<ActivationCache>(ctx.caches[ri]);
      if (!cache.valid) throw std::logic_error("network_backward: missing activation cache");
      if (!cur.same_shape(cache.input)) {
        throw std::invalid_argument("network_backward: upstream " + cur.shape_string() +
                                    " does not match activation input " +
                                    cache.input.shape_string());
      }
      Tensor dz(cur.shape());
      for (std::size_t j = 0; j < cur.size(); ++j) {
        dz[j] = cur[j] * activation_derivative(act->kind, cache.input[j]);
      }
      cur = std::move(dz);
    } else if (const auto* mo = std::get_if<MaxoutBlock>(&node)) {
      const auto& cache = std::get<MaxoutCache>(ctx.caches[ri]);
      MaxoutGrads g = maxout_backward(*mo, cache, cur);
      if (mo->linear.use_bias) rev_grads.push_back(std::move(g.bias));
      rev_grads.push_back(std::move(g.weights));
      cur = std::move(g.input);
    } else if (const auto* conv = std::get_if<ConvLayer>(&node)) {
      const auto& cache = std::get<ConvCache>(ctx.caches[ri]);
      ConvGrads g = conv_backward(*conv, cache, cur);
      rev_grads.push_back(std::move(g.kernels));
      cur = std::move(g.input);
    } else if (const auto* pool = std::get_if<MaxPoolLayer>(&node)) {
      const auto& cache = std::get<MaxPoolCache>(ctx.caches[ri]);
      cur = maxpool_backward(*pool, cache, cur);
    } else if (std::get_if<DropoutLayer>(&node)) {
      const auto& cache = std::get<DropoutCache>(ctx.caches[ri]);
      if (!cache.valid) throw std::logic_error("network_backward: missing dropout cache");
      if (!cur.same_shape(cache.mask)) {
        throw std::invalid_argument("network_backward: upstream " + cur.shape_string() +
                                    " does not match dropout mask " +
                                    cache.mask.shape_string());
      }
      for (std::size_t j = 0; j < cur.size(); ++j) cur[j] *= cache.mask[j];
    } else if (std::get_if<FlattenLayer>(&node)) {
      const auto& cache = std::get<FlattenCache>(ctx.caches[ri]);
      if (!cache.valid) throw std::logic_error("network_backward: missing flatten cache");
      cur = Tensor(cache.in_shape, cur.data());
    }
  }
  BackwardResult out;
  out.input_grad = std::move(cur);
  out.param_grads.assign(rev_grads.rbegin(), rev_grads.rend());
  return out;
}

/* Inference transform
 * -------------------
 * Dropping the dropout nodes and folding W_test = p * W into the next
 * parameterized layer yields a plain deterministic network.
 */

inline Tensor* next_weight_tensor(Network& net, std::size_t after) {
  for (std::size_t i = after; i < net.nodes.size(); ++i) {
    if (auto* dense = std::get_if<DenseLayer>(&net.nodes[i])) return &dense->weights;
    if (auto* mo = std::get_if<MaxoutBlock>(&net.nodes[i])) return &mo->linear.weights;
    if (auto* conv = std::get_if<ConvLayer>(&net.nodes[i])) return &conv->kernels;
  }
  return nullptr;
}

inline Network inference_network(const Network& net) {
  Network out;
  out.input_shape = net.input_shape;
  out.class_count = net.class_count;
  Network scaled = net;
  for (std::size_t i = 0; i < scaled.nodes.size(); ++i) {
    if (const auto* drop = std::get_if<DropoutLayer>(&scaled.nodes[i])) {
      Tensor* w = next_weight_tensor(scaled, i + 1);
      if (!w) {
        throw std::logic_error(
            "inference_network: dropout node has no following weighted layer");
      }
      *w = dropout_scale_for_inference(*w, drop->keep_prob);
    }
  }
  for (auto& node : scaled.nodes) {
    if (!std::get_if<DropoutLayer>(&node)) out.nodes.push_back(std::move(node));
  }
  return out;
}

/* Serialization
 * -------------
 * A short text header describing the pipeline, then the parameter tensors
 * in node order using the binary tensor format.
 */

inline void save_network(std::ostream& os, const Network& net) {
  os << "cmdnn-net 1 " << net.nodes.size() << ' ' << net.class_count << ' '
     << net.input_shape.size();
  for (std::size_t d : net.input_shape) os << ' ' << d;
  os << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& node : net.nodes) {
    if (const auto* dense = std::get_if<DenseLayer>(&node)) {
      os << "dense " << dense->out_size() << ' ' << dense->in_size() << " bias="
         << (dense->use_bias ? 1 : 0) << '\n';
    } else if (const auto* act = std::get_if<ActivationLayer>(&node)) {
      os << "activation " << activation_name(act->kind) << '\n';
    } else if (const auto* mo = std::get_if<MaxoutBlock>(&node)) {
      os << "maxout " << mo->units() << ' ' << mo->group_size << ' ' << mo->in_size()
         << " bias=" << (mo->linear.use_bias ? 1 : 0) << '\n';
    } else if (const auto* conv = std::get_if<ConvLayer>(&node)) {
      os << "conv " << conv->out_channels() << ' ' << conv->in_channels() << ' '
         << conv->kernel_h() << ' ' << conv->kernel_w() << " axis="
         << axis_mode_name(conv->axis_mode) << '\n';
    } else if (const auto* pool = std::get_if<MaxPoolLayer>(&node)) {
      os << "maxpool " << pool->pool_h << ' ' << pool->pool_w << ' ' << pool->stride_h
         << ' ' << pool->stride_w << '\n';
    } else if (const auto* drop = std::get_if<DropoutLayer>(&node)) {
      os << "dropout " << drop->keep_prob << '\n';
    } else if (std::get_if<FlattenLayer>(&node)) {
      os << "flatten\n";
    }
  }
  Network& mut = const_cast<Network&>(net);
  for (Tensor* t : network_params(mut)) write_tensor(os, *t);
  if (!os) throw std::runtime_error("save_network: stream write failed");
}

inline Network load_network(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("load_network: missing header line");
  }
  std::istringstream header(line);
  std::string magic;
  int version = 0;
  std::size_t n_nodes = 0, class_count = 0, rank = 0;
  header >> magic >> version >> n_nodes >> class_count >> rank;
  if (!header || magic != "cmdnn-net" || version != 1) {
    throw std::runtime_error("load_network: bad header '" + line + "'");
  }
  Network net;
  net.class_count = class_count;
  net.input_shape.resize(rank);
  for (std::size_t a = 0; a < rank; ++a) {
    if (!(header >> net.input_shape[a])) {
      throw std::runtime_error("load_network: truncated input shape in header");
    }
  }
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (!std::getline(is, line)) {
      throw std::runtime_error("load_network: missing node line " + std::to_string(i));
    }
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "dense") {
      std::size_t out = 0, in = 0;
      std::string bias_tok;
      ls >> out >> in >> bias_tok;
      if (!ls || (bias_tok != "bias=0" && bias_tok != "bias=1")) {
        throw std::runtime_error("load_network: bad dense line '" + line + "'");
      }
      DenseLayer d(Tensor({out, in}), Tensor({out}), bias_tok == "bias=1");
      net.nodes.emplace_back(std::move(d));
    } else if (kind == "activation") {
      std::string name;
      ls >> name;
      net.nodes.emplace_back(ActivationLayer{activation_from_name(name)});
    } else if (kind == "maxout") {
      std::size_t units = 0, k = 0, in = 0;
      std::string bias_tok;
      ls >> units >> k >> in >> bias_tok;
      if (!ls || (bias_tok != "bias=0" && bias_tok != "bias=1")) {
        throw std::runtime_error("load_network: bad maxout line '" + line + "'");
      }
      DenseLayer lin(Tensor({units * k, in}), Tensor({units * k}), bias_tok == "bias=1");
      net.nodes.emplace_back(MaxoutBlock(std::move(lin), k));
    } else if (kind == "conv") {
      std::size_t oc = 0, ic = 0, kh = 0, kw = 0;
      std::string axis_tok;
      ls >> oc >> ic >> kh >> kw >> axis_tok;
      if (!ls || axis_tok.rfind("axis=", 0) != 0) {
        throw std::runtime_error("load_network: bad conv line '" + line + "'");
      }
      ConvLayer conv(Tensor({oc, ic, kh, kw}), axis_mode_from_name(axis_tok.substr(5)));
      net.nodes.emplace_back(std::move(conv));
    } else if (kind == "maxpool") {
      MaxPoolLayer pool;
      ls >> pool.pool_h >> pool.pool_w >> pool.stride_h >> pool.stride_w;
      if (!ls) throw std::runtime_error("load_network: bad maxpool line '" + line + "'");
      net.nodes.emplace_back(pool);
    } else if (kind == "dropout") {
      double p = 0.0;
      ls >> p;
      if (!ls) throw std::runtime_error("load_network: bad dropout line '" + line + "'");
      net.nodes.emplace_back(DropoutLayer{p});
    } else if (kind == "flatten") {
      net.nodes.emplace_back(FlattenLayer{});
    } else {
      throw std::runtime_error("load_network: unknown node kind '" + kind + "'");
    }
  }
  for (Tensor* t : network_params(net)) {
    Tensor loaded = read_tensor(is);
    if (!loaded.same_shape(*t)) {
      throw std::runtime_error("load_network: tensor shape " + loaded.shape_string() +
                               " does not match node description " + t->shape_string());
    }
    *t = std::move(loaded);
  }
  return net;
}

inline std::string serialize_network(const Network& net) {
  std::ostringstream os(std::ios::binary);
  save_network(os, net);
  return os.str();
}

inline Network deserialize_network(const std::string& blob) {
  std::istringstream is(blob, std::ios::binary);
  return load_network(is);
}

/* Declarative construction
 * ------------------------
 */

enum class LayerOp { kDense, kActivation, kMaxout, kConv, kMaxPool, kDropout, kFlatten };

struct LayerSpec {
  LayerOp op = LayerOp::kDense;
  std::size_t width = 0;                         // dense out / maxout units
  std::size_t group_size = 2;                    // maxout
  bool use_bias = true;                          // dense and maxout
  ActivationKind act_kind = ActivationKind::kIdentity;
  std::size_t channels = 0, kernel_h = 0, kernel_w = 0;  // conv
  AxisMode axis_mode = AxisMode::kBoth;
  std::size_t pool_h = 1, pool_w = 1;            // maxpool
  double keep_prob = 1.0;                        // dropout

  static LayerSpec dense(std::size_t width, bool bias = true) {
    LayerSpec s;
    s.op = LayerOp::kDense;
    s.width = width;
    s.use_bias = bias;
    return s;
  }
  static LayerSpec activation(ActivationKind k) {
    LayerSpec s;
    s.op = LayerOp::kActivation;
    s.act_kind = k;
    return s;
  }
  static LayerSpec maxout(std::size_t units, std::size_t k) {
    LayerSpec s;
    s.op = LayerOp::kMaxout;
    s.width = units;
    s.group_size = k;
    return s;
  }
  static LayerSpec conv(std::size_t channels, std::size_t kh, std::size_t kw,
                        AxisMode mode) {
    LayerSpec s;
    s.op = LayerOp::kConv;
    s.channels = channels;
    s.kernel_h = kh;
    s.kernel_w = kw;
    s.axis_mode = mode;
    return s;
  }
  static LayerSpec maxpool(std::size_t ph, std::size_t pw) {
    LayerSpec s;
    s.op = LayerOp::kMaxPool;
    s.pool_h = ph;
    s.pool_w = pw;
    return s;
  }
  static LayerSpec dropout(double keep_prob) {
    LayerSpec s;
    s.op = LayerOp::kDropout;
    s.keep_prob = keep_prob;
    return s;
  }
  static LayerSpec flatten() {
    LayerSpec s;
    s.op = LayerOp::kFlatten;
    return s;
  }
};

struct NetworkConfig {
  std::vector<std::size_t> input_shape;  // per-example, no batch axis
  std::vector<LayerSpec> layers;
  std::size_t class_count = 30;
};

namespace detail {

inline Tensor glorot_uniform(const std::vector<std::size_t>& shape, std::size_t fan_in,
                             std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

}  // namespace detail

/// Build a freshly initialized network. Shapes are propagated symbolically
/// through the pipeline so mis-sized layers fail here rather than at the
/// first forward pass. Weights use Glorot uniform init, biases start at 0.
inline Network build_network(const NetworkConfig& config, std::uint64_t seed) {
  if (config.input_shape.empty()) {
    throw std::invalid_argument("build_network: empty input shape");
  }
  for (std::size_t d : config.input_shape) {
    if (d == 0) throw std::invalid_argument("build_network: zero input dimension");
  }
  std::mt19937_64 rng(seed);
  Network net;
  net.input_shape = config.input_shape;
  net.class_count = config.class_count;
  std::vector<std::size_t> shape = config.input_shape;  // per-example
  auto flat_size = [&shape]() {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<std::size_t>());
  };
  for (std::size_t li = 0; li < config.layers.size(); ++li) {
    const LayerSpec& spec = config.layers[li];
    switch (spec.op) {
      case LayerOp::kDense: {
        if (shape.size() != 1) {
          throw std::invalid_argument(
              "build_network: dense layer " + std::to_string(li) +
              " needs a flat input; insert a flatten before it");
        }
        if (spec.width == 0) {
          throw std::invalid_argument("build_network: dense layer width must be >= 1");
        }
        const std::size_t in = shape[0];
        Tensor w = detail::glorot_uniform({spec.width, in}, in, spec.width, rng);
        net.nodes.emplace_back(DenseLayer(std::move(w), Tensor({spec.width}),
                                          spec.use_bias));
        shape = {spec.width};
        break;
      }
      case LayerOp::kActivation:
        net.nodes.emplace_back(ActivationLayer{spec.act_kind});
        break;
      case LayerOp::kMaxout: {
        if (shape.size() != 1) {
          throw std::invalid_argument(
              "build_network: maxout layer " + std::to_string(li) +
              " needs a flat input; insert a flatten before it");
        }
        if (spec.width == 0 || spec.group_size == 0) {
          throw std::invalid_argument(
              "build_network: maxout units and group size must be >= 1");
        }
        const std::size_t in = shape[0];
        const std::size_t wide = spec.width * spec.group_size;
        Tensor w = detail::glorot_uniform({wide, in}, in, wide, rng);
        DenseLayer lin(std::move(w), Tensor({wide}), spec.use_bias);
        net.nodes.emplace_back(MaxoutBlock(std::move(lin), spec.group_size));
        shape = {spec.width};
        break;
      }
      case LayerOp::kConv: {
        if (shape.size() != 3) {
          throw std::invalid_argument("build_network: conv layer " + std::to_string(li) +
                                      " needs a [channels,freq,time] input");
        }
        const std::size_t ic = shape[0], F = shape[1], T = shape[2];
        if (spec.kernel_h > F || spec.kernel_w > T) {
          std::ostringstream msg;
          msg << "build_network: conv kernel " << spec.kernel_h << "x" << spec.kernel_w
              << " exceeds input extents [" << F << "," << T << "]";
          throw std::invalid_argument(msg.str());
        }
        const std::size_t fan_in = ic * spec.kernel_h * spec.kernel_w;
        const std::size_t fan_out = spec.channels * spec.kernel_h * spec.kernel_w;
        Tensor k = detail::glorot_uniform({spec.channels, ic, spec.kernel_h, spec.kernel_w},
                                          fan_in, fan_out, rng);
        net.nodes.emplace_back(ConvLayer(std::move(k), spec.axis_mode));
        shape = {spec.channels, F - spec.kernel_h + 1, T - spec.kernel_w + 1};
        break;
      }
      case LayerOp::kMaxPool: {
        if (shape.size() != 3) {
          throw std::invalid_argument("build_network: maxpool layer " +
                                      std::to_string(li) +
                                      " needs a [channels,freq,time] input");
        }
        if (spec.pool_h > shape[1] || spec.pool_w > shape[2]) {
          std::ostringstream msg;
          msg << "build_network: pool " << spec.pool_h << "x" << spec.pool_w
              << " exceeds input extents [" << shape[1] << "," << shape[2] << "]";
          throw std::invalid_argument(msg.str());
        }
        net.nodes.emplace_back(MaxPoolLayer(spec.pool_h, spec.pool_w));
        shape = {shape[0],
                 MaxPoolLayer::out_extent(shape[1], spec.pool_h, spec.pool_h),
                 MaxPoolLayer::out_extent(shape[2], spec.pool_w, spec.pool_w)};
        break;
      }
      case LayerOp::kDropout:
        if (!(spec.keep_prob > 0.0 && spec.keep_prob <= 1.0)) {
          std::ostringstream msg;
          msg << "build_network: dropout keep probability " << spec.keep_prob
              << " outside (0,1]";
          throw std::invalid_argument(msg.str());
        }
        net.nodes.emplace_back(DropoutLayer{spec.keep_prob});
        break;
      case LayerOp::kFlatten:
        net.nodes.emplace_back(FlattenLayer{});
        shape = {flat_size()};
        break;
    }
  }
  if (shape.size() != 1 || shape[0] != config.class_count) {
    std::ostringstream msg;
    msg << "build_network: pipeline output size "
        << (shape.size() == 1 ? std::to_string(shape[0]) : Tensor::shape_string(shape))
        << " does not match class count " << config.class_count;
    throw std::invalid_argument(msg.str());
  }
  return net;
}

}  // namespace cmdnn

#endif  // CMDNN_NETWORK_HPP_
