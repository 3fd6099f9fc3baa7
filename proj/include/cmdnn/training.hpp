// cmdnn/training.hpp

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

#ifndef CMDNN_TRAINING_HPP_
#define CMDNN_TRAINING_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdnn/dataset.hpp"
#include "cmdnn/network.hpp"
#include "cmdnn/tensor.hpp"

namespace cmdnn {

/* Config and state
 * ----------------
 */

struct TrainConfig {
  double initial_lr = 0.1;
  std::size_t halving_limit = 5;
  std::optional<double> max_norm_C;  // explicit constraint radius
  bool auto_max_norm = true;         // C=2 when relu or maxout layers are present
  std::size_t batch_size = 128;
  std::size_t max_epochs = 50;
  std::optional<double> dropout_keep;  // overrides every dropout node when set
  std::uint64_t seed = 0;
};

struct TrainState {
  std::size_t epoch = 0;
  double initial_lr = 0.1;
  double lr = 0.1;
  std::size_t halvings = 0;
  std::size_t halving_limit = 5;
  double best_acc = -1.0;
  std::size_t best_epoch = 0;
  std::string best_weights;  // serialized network snapshot
  bool stopped = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double eval_acc = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

inline const char* epoch_csv_header() { return "epoch,loss,acc,lr,seconds"; }

inline void write_epoch_record(std::ostream& os, const EpochRecord& r) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << r.epoch << ',' << r.train_loss << ',' << r.eval_acc << ',' << r.lr << ','
     << r.seconds << '\n';
}

/* Elementary update steps
 * -----------------------
 */

inline void sgd_step(Tensor& param, const Tensor& grad, double lr) {
  if (!param.same_shape(grad)) {
    throw std::invalid_argument("sgd_step: gradient " + grad.shape_string() +
                                " does not match parameter " + param.shape_string());
  }
  double* p = param.raw();
  const double* g = grad.raw();
  for (std::size_t i = 0; i < param.size(); ++i) p[i] -= lr * g[i];
}

/// Project every row (the incoming-weight vector of one output unit; for
/// tensors above rank 2 the trailing axes are flattened into the row) onto
/// the Euclidean ball of radius C. The small slack keeps the projection a
/// strict no-op on rows already at the boundary, which makes it idempotent.
inline void max_norm_project(Tensor& weights, double C) {
  if (!(C > 0.0)) {
    throw std::invalid_argument("max_norm_project: radius must be positive");
  }
  if (weights.rank() < 1) return;
  const std::size_t rows = weights.dim(0);
  const std::size_t cols = weights.size() / rows;
  double* p = weights.raw();
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = p + r * cols;
    double sq = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sq += row[c] * row[c];
    const double norm = std::sqrt(sq);
    if (norm > C * (1.0 + 1e-12)) {
      const double scale = C / norm;
      for (std::size_t c = 0; c < cols; ++c) row[c] *= scale;
    }
  }
}

/* Schedule
 * --------
 * Strictly better evaluation accuracy records a snapshot; anything else
 * (including a tie) halves the learning rate, restores the best snapshot,
 * and after halving_limit such strikes training stops.
 */

inline void epoch_end_schedule(TrainState& state, double eval_acc, Network& net) {
  if (state.stopped) {
    throw std::logic_error("epoch_end_schedule: schedule already stopped");
  }
  if (eval_acc > state.best_acc) {
    state.best_acc = eval_acc;
    state.best_epoch = state.epoch;
    state.best_weights = serialize_network(net);
  } else {
    state.halvings += 1;
    state.lr = std::ldexp(state.initial_lr, -static_cast<int>(state.halvings));
    net = deserialize_network(state.best_weights);
    if (state.halvings >= state.halving_limit) state.stopped = true;
  }
}

inline double frame_accuracy(const std::vector<int>& predictions,
                             const std::vector<int>& labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw std::invalid_argument("frame_accuracy: need equal-length nonempty inputs, got " +
                                std::to_string(predictions.size()) + " and " +
                                std::to_string(labels.size()));
  }
  std::size_t matches = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++matches;
  }
  return 100.0 * static_cast<double>(matches) / static_cast<double>(predictions.size());
}

/* Batching
 * --------
 */

/// Assemble the selected dataset rows into the network's input layout:
/// flat [batch, dim] for a rank-1 input shape, or [batch, 1, F, T] for a
/// rank-3 one, where row column t*F + f maps to position (f, t).
inline Tensor batch_from_rows(const FrameDataset& ds,
                              const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& input_shape) {
  if (rows.empty()) {
    throw std::invalid_argument("batch_from_rows: empty batch");
  }
  const std::size_t dim = ds.dim();
  if (input_shape.size() == 1) {
    if (input_shape[0] != dim) {
      throw std::invalid_argument("batch_from_rows: dataset dim " + std::to_string(dim) +
                                  " does not match network input " +
                                  std::to_string(input_shape[0]));
    }
    Tensor x({rows.size(), dim});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy(ds.features.raw() + rows[i] * dim, ds.features.raw() + (rows[i] + 1) * dim,
                x.raw() + i * dim);
    }
    return x;
  }
  if (input_shape.size() == 3) {
    const std::size_t ch = input_shape[0], F = input_shape[1], T = input_shape[2];
    if (ch != 1 || F * T != dim) {
      throw std::invalid_argument(
          "batch_from_rows: dataset dim " + std::to_string(dim) +
          " does not match network input " + Tensor::shape_string(input_shape));
    }
    Tensor x({rows.size(), 1, F, T});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double* src = ds.features.raw() + rows[i] * dim;
      double* dst = x.raw() + i * dim;
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t f = 0; f < F; ++f) {
          dst[f * T + t] = src[t * F + f];
        }
      }
    }
    return x;
  }
  throw std::invalid_argument("batch_from_rows: unsupported input shape " +
                              Tensor::shape_string(input_shape));
}

inline std::vector<int> predict_labels(const Network& inference_net,
                                       const FrameDataset& ds, std::size_t batch_size) {
  std::vector<int> pred;
  pred.reserve(ds.size());
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < ds.size(); start += batch_size) {
    const std::size_t stop = std::min(ds.size(), start + batch_size);
    rows.resize(stop - start);
    std::iota(rows.begin(), rows.end(), start);
    const Tensor x = batch_from_rows(ds, rows, inference_net.input_shape);
    const Tensor logits = network_forward(inference_net, x, PassMode::kInference);
    const std::size_t classes = logits.dim(1);
    for (std::size_t b = 0; b < logits.dim(0); ++b) {
      const double* row = logits.raw() + b * classes;
      std::size_t best = 0;
      for (std::size_t c = 1; c < classes; ++c) {
        if (row[c] > row[best]) best = c;
      }
      pred.push_back(static_cast<int>(best));
    }
  }
  return pred;
}

/// Accuracy of the dropout-rescaled inference version of the network.
inline double evaluate_accuracy(const Network& net, const FrameDataset& ds,
                                std::size_t batch_size = 128) {
  const Network test_net = inference_network(net);
  return frame_accuracy(predict_labels(test_net, ds, batch_size), ds.labels);
}

/* Training loop
 * -------------
 */

struct TrainResult {
  std::vector<EpochRecord> records;
  TrainState state;
};

inline bool network_wants_max_norm(const Network& net) {
  for (const auto& node : net.nodes) {
    if (std::get_if<MaxoutBlock>(&node)) return true;
    if (const auto* act = std::get_if<ActivationLayer>(&node)) {
      if (act->kind == ActivationKind::kRelu) return true;
    }
  }
  return false;
}

/// Mini-batch SGD with per-epoch evaluation and the halving schedule. The
/// network is trained in place and left holding the best snapshot seen.
/// Optional streams receive the epoch CSV rows and free-form log lines.
inline TrainResult train(Network& net, const FrameDataset& train_set,
                         const FrameDataset& eval_set, const TrainConfig& cfg,
                         std::ostream* epoch_csv = nullptr,
                         std::ostream* log = nullptr) {
  validate_dataset(train_set);
  validate_dataset(eval_set);
  if (cfg.batch_size == 0) {
    throw std::invalid_argument("train: batch size must be >= 1");
  }
  if (!(cfg.initial_lr > 0.0)) {
    throw std::invalid_argument("train: initial learning rate must be positive");
  }
  if (cfg.halving_limit < 1) {
    throw std::invalid_argument("train: halving limit must be >= 1");
  }
  if (cfg.dropout_keep) {
    const DropoutSpec check(*cfg.dropout_keep);  // range validation
    for (auto& node : net.nodes) {
      if (auto* drop = std::get_if<DropoutLayer>(&node)) {
        drop->keep_prob = check.keep_prob;
      }
    }
  }
  std::optional<double> max_norm = cfg.max_norm_C;
  if (!max_norm && cfg.auto_max_norm && network_wants_max_norm(net)) {
    max_norm = 2.0;
  }
  if (max_norm && !(*max_norm > 0.0)) {
    throw std::invalid_argument("train: max-norm radius must be positive");
  }

  std::mt19937_64 rng(cfg.seed);
  TrainState state;
  state.initial_lr = cfg.initial_lr;
  state.lr = cfg.initial_lr;
  state.halving_limit = cfg.halving_limit;
  state.best_weights = serialize_network(net);
  state.best_epoch = 0;

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  if (epoch_csv && epoch_csv->tellp() <= std::streampos(0)) {
    *epoch_csv << epoch_csv_header() << '\n';
  }

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs && !state.stopped; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    state.epoch = epoch;
    const double lr = state.lr;
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t loss_frames = 0;
    std::vector<std::size_t> rows;
    std::vector<int> labels;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      rows.assign(order.begin() + start, order.begin() + stop);
      labels.clear();
      for (std::size_t r : rows) labels.push_back(train_set.labels[r]);
      const Tensor x = batch_from_rows(train_set, rows, net.input_shape);
      PassContext ctx;
      const Tensor logits = network_forward(net, x, PassMode::kTrain, &rng, &ctx);
      const SoftmaxXent xent = softmax_xent(logits, labels);
      if (!std::isfinite(xent.loss)) {
        std::ostringstream msg;
        msg << "train: non-finite loss at epoch " << epoch << ", batch starting at "
            << start << " (lr=" << lr << ")";
        throw std::runtime_error(msg.str());
      }
      loss_sum += xent.loss * static_cast<double>(rows.size());
      loss_frames += rows.size();
      const BackwardResult grads = network_backward(net, ctx, xent.grad);
      const std::vector<Tensor*> params = network_params(net);
      if (params.size() != grads.param_grads.size()) {
        throw std::logic_error("train: parameter/gradient count mismatch");
      }
      for (std::size_t pi = 0; pi < params.size(); ++pi) {
        sgd_step(*params[pi], grads.param_grads[pi], lr);
      }
      if (max_norm) {
        for (Tensor* w : network_weight_matrices(net)) {
          max_norm_project(*w, *max_norm);
        }
      }
    }

    const double train_loss = loss_sum / static_cast<double>(loss_frames);
    const double eval_acc = evaluate_accuracy(net, eval_set, cfg.batch_size);
    const auto t1 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss;
    rec.eval_acc = eval_acc;
    rec.lr = lr;
    rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    result.records.push_back(rec);
    if (epoch_csv) write_epoch_record(*epoch_csv, rec);
    if (log) {
      *log << "epoch " << epoch << " loss " << train_loss << " acc " << eval_acc
           << " lr " << lr << '\n';
    }
    epoch_end_schedule(state, eval_acc, net);
  }

  net = deserialize_network(state.best_weights);
  result.state = std::move(state);
  return result;
}

}  // namespace cmdnn

#endif  // CMDNN_TRAINING_HPP_
