// cmdnn/structure.hpp

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

#ifndef CMDNN_STRUCTURE_HPP_
#define CMDNN_STRUCTURE_HPP_

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdnn/layers.hpp"
#include "cmdnn/network.hpp"

namespace cmdnn {

/* Structure strings
 * -----------------
 * Three families:
 *   FC-<n>hidden-<w>                      uniform fully connected stack
 *   Pre-trained_FC <w1>-<w2>-...          sigmoid stack with pretraining
 *   <1D|2D>-CMNN (C<c> K<k> S<s>)+ (F<f>)+  conv blocks then maxout FC layers
 * C is the channel count, K the kernel extent along each shared axis, S the
 * max-pooling size along each shared axis, F a fully connected width. 1D
 * structures additionally need a sharing axis (T or F) that the string
 * itself does not encode.
 */

enum class NeuronModel { kSigmoid, kRelu, kMaxout };

inline const char* neuron_name(NeuronModel m) {
  switch (m) {
    case NeuronModel::kSigmoid: return "Sigmoid";
    case NeuronModel::kRelu: return "ReLU";
    case NeuronModel::kMaxout: return "Maxout";
  }
  return "?";
}

inline NeuronModel neuron_from_name(const std::string& s) {
  if (s == "Sigmoid" || s == "sigmoid") return NeuronModel::kSigmoid;
  if (s == "ReLU" || s == "relu" || s == "Relu") return NeuronModel::kRelu;
  if (s == "Maxout" || s == "maxout") return NeuronModel::kMaxout;
  throw std::invalid_argument("unknown neuron model: " + s);
}

/// Weight-sharing axis labels as they appear in result tables.
inline const char* share_label(AxisMode m) {
  switch (m) {
    case AxisMode::kTimeOnly: return "T";
    case AxisMode::kFrequencyOnly: return "F";
    case AxisMode::kBoth: return "T&F";
  }
  return "?";
}

struct ConvBlockSpec {
  std::size_t channels = 0;
  std::size_t kernel = 0;
  std::size_t pool = 0;
};

struct StructureSpec {
  enum class Form { kFc, kPretrainedFc, kConv };

  std::string text;  // canonical structure string
  Form form = Form::kFc;
  std::size_t conv_dims = 0;  // 1 or 2 for the conv form
  std::vector<ConvBlockSpec> blocks;
  std::vector<std::size_t> fc_widths;  // hidden widths, in order
  NeuronModel neuron = NeuronModel::kSigmoid;
  bool pretrain = false;
  std::optional<double> dropout_keep;
  std::optional<AxisMode> share;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline std::size_t parse_count(const std::string& s, const std::string& what) {
  if (s.empty()) {
    throw std::invalid_argument("structure: empty " + what);
  }
  for (char c : s) {
    if (c < '0' || c > '9') {
      throw std::invalid_argument("structure: malformed " + what + " '" + s + "'");
    }
  }
  const unsigned long long v = std::stoull(s);
  if (v == 0 || v > 1000000ull) {
    throw std::invalid_argument("structure: " + what + " '" + s + "' out of range");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline StructureSpec parse_structure_spec(const std::string& text) {
  const std::vector<std::string> tokens = detail::split_ws(text);
  if (tokens.empty()) {
    throw std::invalid_argument("structure: empty structure string");
  }
  StructureSpec spec;
  const std::string& head = tokens[0];

  if (head.rfind("FC-", 0) == 0) {
    if (tokens.size() != 1) {
      throw std::invalid_argument("structure: unexpected token '" + tokens[1] +
                                  "' after '" + head + "'");
    }
    const std::size_t hid = head.find("hidden-", 3);
    if (hid == std::string::npos) {
      throw std::invalid_argument("structure: malformed FC form '" + head + "'");
    }
    const std::string n_str = head.substr(3, hid - 3);
    const std::string w_str = head.substr(hid + 7);
    if (n_str == "0") {
      throw std::invalid_argument("structure: '" + head + "' has zero hidden layers");
    }
    const std::size_t n = detail::parse_count(n_str, "hidden-layer count");
    const std::size_t w = detail::parse_count(w_str, "layer width");
    spec.form = StructureSpec::Form::kFc;
    spec.fc_widths.assign(n, w);
    spec.text = "FC-" + std::to_string(n) + "hidden-" + std::to_string(w);
    return spec;
  }

  if (head == "Pre-trained_FC") {
    if (tokens.size() != 2) {
      throw std::invalid_argument(
          "structure: Pre-trained_FC needs exactly one width list token");
    }
    std::string widths = tokens[1];
    std::size_t pos = 0;
    while (pos <= widths.size()) {
      const std::size_t dash = widths.find('-', pos);
      const std::string piece =
          widths.substr(pos, dash == std::string::npos ? std::string::npos : dash - pos);
      spec.fc_widths.push_back(detail::parse_count(piece, "layer width"));
      if (dash == std::string::npos) break;
      pos = dash + 1;
    }
    spec.form = StructureSpec::Form::kPretrainedFc;
    spec.neuron = NeuronModel::kSigmoid;
    spec.pretrain = true;
    spec.text = "Pre-trained_FC " + tokens[1];
    return spec;
  }

  if (head == "1D-CMNN" || head == "2D-CMNN") {
    spec.form = StructureSpec::Form::kConv;
    spec.conv_dims = head[0] == '1' ? 1 : 2;
    spec.neuron = NeuronModel::kMaxout;
    std::size_t i = 1;
    while (i < tokens.size() && tokens[i].size() > 1 && tokens[i][0] == 'C') {
      if (i + 2 >= tokens.size() || tokens[i + 1][0] != 'K' || tokens[i + 2][0] != 'S') {
        throw std::invalid_argument(
            "structure: conv block must be a C K S token triple, got '" + tokens[i] +
            "...'");
      }
      ConvBlockSpec block;
      block.channels = detail::parse_count(tokens[i].substr(1), "channel count");
      block.kernel = detail::parse_count(tokens[i + 1].substr(1), "kernel size");
      block.pool = detail::parse_count(tokens[i + 2].substr(1), "pooling size");
      spec.blocks.push_back(block);
      i += 3;
    }
    if (spec.blocks.empty()) {
      throw std::invalid_argument("structure: '" + head + "' needs at least one conv block");
    }
    while (i < tokens.size()) {
      if (tokens[i].size() < 2 || tokens[i][0] != 'F') {
        throw std::invalid_argument("structure: malformed token '" + tokens[i] + "'");
      }
      spec.fc_widths.push_back(detail::parse_count(tokens[i].substr(1), "FC width"));
      ++i;
    }
    if (spec.fc_widths.empty()) {
      throw std::invalid_argument("structure: '" + head +
                                  "' needs at least one F layer after the conv blocks");
    }
    std::ostringstream canon;
    canon << head;
    for (const ConvBlockSpec& b : spec.blocks) {
      canon << " C" << b.channels << " K" << b.kernel << " S" << b.pool;
    }
    for (std::size_t w : spec.fc_widths) canon << " F" << w;
    spec.text = canon.str();
    return spec;
  }

  throw std::invalid_argument("structure: unrecognized structure '" + head + "'");
}

inline std::string render_structure(const StructureSpec& spec) {
  switch (spec.form) {
    case StructureSpec::Form::kFc:
      return "FC-" + std::to_string(spec.fc_widths.size()) + "hidden-" +
             std::to_string(spec.fc_widths.empty() ? 0 : spec.fc_widths[0]);
    case StructureSpec::Form::kPretrainedFc: {
      std::ostringstream os;
      os << "Pre-trained_FC ";
      for (std::size_t i = 0; i < spec.fc_widths.size(); ++i) {
        if (i) os << '-';
        os << spec.fc_widths[i];
      }
      return os.str();
    }
    case StructureSpec::Form::kConv: {
      std::ostringstream os;
      os << spec.conv_dims << "D-CMNN";
      for (const ConvBlockSpec& b : spec.blocks) {
        os << " C" << b.channels << " K" << b.kernel << " S" << b.pool;
      }
      for (std::size_t w : spec.fc_widths) os << " F" << w;
      return os.str();
    }
  }
  return spec.text;
}

namespace detail {

inline void append_hidden_fc(NetworkConfig& config, NeuronModel neuron, std::size_t width,
                             std::size_t maxout_group) {
  switch (neuron) {
    case NeuronModel::kSigmoid:
      config.layers.push_back(LayerSpec::dense(width, true));
      config.layers.push_back(LayerSpec::activation(ActivationKind::kSigmoid));
      break;
    case NeuronModel::kRelu:
      config.layers.push_back(LayerSpec::dense(width, false));
      config.layers.push_back(LayerSpec::activation(ActivationKind::kRelu));
      break;
    case NeuronModel::kMaxout:
      config.layers.push_back(LayerSpec::maxout(width, maxout_group));
      break;
  }
}

}  // namespace detail

/// Lower a parsed structure to a buildable pipeline. FC nets take the flat
/// stacked vector; conv nets reshape it to [1, n_filters, width]. Dropout
/// (when set) follows each fully connected hidden layer and nothing else.
inline NetworkConfig to_network_config(const StructureSpec& spec,
                                       std::size_t context_width, std::size_t n_filters,
                                       std::size_t class_count = 30,
                                       std::size_t maxout_group = 2) {
  if (context_width == 0 || n_filters == 0 || class_count == 0) {
    throw std::invalid_argument("to_network_config: all sizes must be >= 1");
  }
  NetworkConfig config;
  config.class_count = class_count;

  if (spec.form == StructureSpec::Form::kConv) {
    if (!spec.share) {
      throw std::invalid_argument(
          "to_network_config: conv structure needs a weight-sharing axis");
    }
    if (spec.conv_dims == 1 && *spec.share == AxisMode::kBoth) {
      throw std::invalid_argument(
          "to_network_config: 1D structure takes a single sharing axis (T or F)");
    }
    if (spec.conv_dims == 2 && *spec.share != AxisMode::kBoth) {
      throw std::invalid_argument("to_network_config: 2D structure shares along T&F");
    }
    config.input_shape = {1, n_filters, context_width};
    for (const ConvBlockSpec& b : spec.blocks) {
      std::size_t kh = 1, kw = 1, ph = 1, pw = 1;
      switch (*spec.share) {
        case AxisMode::kTimeOnly:
          kw = b.kernel;
          pw = b.pool;
          break;
        case AxisMode::kFrequencyOnly:
          kh = b.kernel;
          ph = b.pool;
          break;
        case AxisMode::kBoth:
          kh = kw = b.kernel;
          ph = pw = b.pool;
          break;
      }
      config.layers.push_back(LayerSpec::conv(b.channels, kh, kw, *spec.share));
      if (ph > 1 || pw > 1) {
        config.layers.push_back(LayerSpec::maxpool(ph, pw));
      }
    }
    config.layers.push_back(LayerSpec::flatten());
    for (std::size_t w : spec.fc_widths) {
      detail::append_hidden_fc(config, NeuronModel::kMaxout, w, maxout_group);
      if (spec.dropout_keep) config.layers.push_back(LayerSpec::dropout(*spec.dropout_keep));
    }
  } else {
    config.input_shape = {context_width * n_filters};
    for (std::size_t w : spec.fc_widths) {
      detail::append_hidden_fc(config, spec.neuron, w, maxout_group);
      if (spec.dropout_keep) config.layers.push_back(LayerSpec::dropout(*spec.dropout_keep));
    }
  }
  config.layers.push_back(LayerSpec::dense(class_count, true));
  return config;
}

/// One-call form: parse, apply the neuron model and sharing axis, lower.
inline NetworkConfig parse_structure(const std::string& text, NeuronModel neuron,
                                     std::size_t context_width, std::size_t n_filters,
                                     std::optional<AxisMode> share = std::nullopt,
                                     std::optional<double> dropout_keep = std::nullopt,
                                     std::size_t class_count = 30,
                                     std::size_t maxout_group = 2) {
  StructureSpec spec = parse_structure_spec(text);
  if (spec.form == StructureSpec::Form::kFc) {
    spec.neuron = neuron;
  } else if (spec.neuron != neuron) {
    throw std::invalid_argument(std::string("parse_structure: '") + spec.text +
                                "' requires " + neuron_name(spec.neuron) + " units");
  }
  if (share) spec.share = share;
  if (spec.form == StructureSpec::Form::kConv && spec.conv_dims == 2 && !spec.share) {
    spec.share = AxisMode::kBoth;
  }
  if (dropout_keep) spec.dropout_keep = dropout_keep;
  return to_network_config(spec, context_width, n_filters, class_count, maxout_group);
}

}  // namespace cmdnn

#endif  // CMDNN_STRUCTURE_HPP_
