// cmdnn/dataset.hpp

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

#ifndef CMDNN_DATASET_HPP_
#define CMDNN_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdnn/tensor.hpp"

namespace cmdnn {

/* Frame dataset
 * -------------
 * A labeled frame collection: features [n, dim], one class label and one
 * speaker id per frame. Feature rows are time-major: coefficient f of
 * context frame t sits at column t * n_filters + f.
 */

struct FrameDataset {
  Tensor features;  // [n, dim]
  std::vector<int> labels;
  std::vector<int> speaker_ids;
  std::size_t class_count = 30;

  std::size_t size() const { return features.rank() == 2 ? features.dim(0) : 0; }
  std::size_t dim() const { return features.rank() == 2 ? features.dim(1) : 0; }
};

inline void validate_dataset(const FrameDataset& ds) {
  if (ds.features.rank() != 2) {
    throw std::invalid_argument("dataset: features must be rank-2, got " +
                                ds.features.shape_string());
  }
  const std::size_t n = ds.features.dim(0);
  if (ds.labels.size() != n) {
    throw std::invalid_argument("dataset: " + std::to_string(ds.labels.size()) +
                                " labels for " + std::to_string(n) + " frames");
  }
  if (ds.speaker_ids.size() != n) {
    throw std::invalid_argument("dataset: " + std::to_string(ds.speaker_ids.size()) +
                                " speaker ids for " + std::to_string(n) + " frames");
  }
  if (ds.class_count == 0) {
    throw std::invalid_argument("dataset: class count must be >= 1");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.labels[i] < 0 || static_cast<std::size_t>(ds.labels[i]) >= ds.class_count) {
      std::ostringstream msg;
      msg << "dataset: label " << ds.labels[i] << " of frame " << i
          << " outside [0," << ds.class_count << ")";
      throw std::invalid_argument(msg.str());
    }
    if (ds.speaker_ids[i] < 0) {
      std::ostringstream msg;
      msg << "dataset: negative speaker id " << ds.speaker_ids[i] << " at frame " << i;
      throw std::invalid_argument(msg.str());
    }
  }
}

inline std::vector<int> distinct_speakers(const FrameDataset& ds) {
  std::set<int> seen(ds.speaker_ids.begin(), ds.speaker_ids.end());
  return std::vector<int>(seen.begin(), seen.end());
}

/* Speaker-disjoint splits
 * -----------------------
 */

struct SplitSpec {
  std::set<int> train_speakers;
  std::set<int> test_speakers;
};

struct DatasetSplit {
  FrameDataset train;
  FrameDataset test;
};

/// An empty selection yields an empty dataset (rank-0 features, no rows).
inline FrameDataset select_frames(const FrameDataset& ds,
                                  const std::vector<std::size_t>& rows) {
  FrameDataset out;
  out.class_count = ds.class_count;
  if (rows.empty()) return out;
  const std::size_t dim = ds.dim();
  out.features = Tensor({rows.size(), dim});
  out.labels.reserve(rows.size());
  out.speaker_ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    if (r >= ds.size()) {
      throw std::out_of_range("select_frames: row " + std::to_string(r) +
                              " outside dataset of " + std::to_string(ds.size()));
    }
    std::copy(ds.features.raw() + r * dim, ds.features.raw() + (r + 1) * dim,
              out.features.raw() + i * dim);
    out.labels.push_back(ds.labels[r]);
    out.speaker_ids.push_back(ds.speaker_ids[r]);
  }
  return out;
}

/// Split the frames by speaker id. The two speaker sets must be disjoint and
/// together cover every speaker that occurs in the data.
inline DatasetSplit split_by_speaker(const FrameDataset& ds, const SplitSpec& spec) {
  for (int s : spec.test_speakers) {
    if (spec.train_speakers.count(s)) {
      throw std::invalid_argument("split_by_speaker: speaker " + std::to_string(s) +
                                  " appears in both train and test sets");
    }
  }
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int s = ds.speaker_ids[i];
    if (spec.train_speakers.count(s)) {
      train_rows.push_back(i);
    } else if (spec.test_speakers.count(s)) {
      test_rows.push_back(i);
    } else {
      throw std::invalid_argument("split_by_speaker: speaker " + std::to_string(s) +
                                  " assigned to neither train nor test");
    }
  }
  return DatasetSplit{select_frames(ds, train_rows), select_frames(ds, test_rows)};
}

/// Hold out the highest-numbered n_test distinct speakers for evaluation.
inline DatasetSplit default_split(const FrameDataset& ds, std::size_t n_test = 7) {
  const std::vector<int> speakers = distinct_speakers(ds);
  if (speakers.size() <= n_test) {
    throw std::invalid_argument("default_split: need more than " +
                                std::to_string(n_test) + " speakers, have " +
                                std::to_string(speakers.size()));
  }
  SplitSpec spec;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    if (i + n_test < speakers.size()) {
      spec.train_speakers.insert(speakers[i]);
    } else {
      spec.test_speakers.insert(speakers[i]);
    }
  }
  return split_by_speaker(ds, spec);
}

/* Synthetic frame generator
 * -------------------------
 * Each class is a smooth prototype pattern over the (time, filter) grid,
 * built from a few random 2-D sinusoids. A speaker is an additive per-filter
 * offset plus a scalar gain applied to every frame of that speaker, and each
 * frame gets fresh Gaussian noise on top. Everything is drawn from a single
 * seeded generator, so a config maps to exactly one dataset.
 */

struct SynthConfig {
  std::size_t n_speakers = 50;
  std::size_t frames_per_speaker = 40;
  std::size_t n_filters = 24;
  std::size_t width = 15;  // context frames per example
  std::size_t class_count = 30;
  double noise_std = 0.3;
  double speaker_offset_std = 0.15;
  double speaker_gain_std = 0.05;
  std::uint64_t seed = 0;
};

inline FrameDataset make_synth_dataset(const SynthConfig& cfg) {
  if (cfg.n_speakers == 0 || cfg.frames_per_speaker == 0 || cfg.n_filters == 0 ||
      cfg.width == 0 || cfg.class_count == 0) {
    throw std::invalid_argument("make_synth_dataset: all sizes must be >= 1");
  }
  if (cfg.noise_std < 0.0) {
    throw std::invalid_argument("make_synth_dataset: negative noise level");
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> amp_dist(0.0, 0.45);
  std::uniform_real_distribution<double> freq_dist(0.5, 3.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * 3.14159265358979323846);

  const std::size_t n_components = 4;
  const std::size_t dim = cfg.width * cfg.n_filters;

  // Class prototypes, drawn first and in class order.
  std::vector<std::vector<double>> prototypes(cfg.class_count,
                                              std::vector<double>(dim, 0.0));
  for (std::size_t c = 0; c < cfg.class_count; ++c) {
    for (std::size_t j = 0; j < n_components; ++j) {
      const double amp = amp_dist(rng);
      const double u = freq_dist(rng);
      const double v = freq_dist(rng);
      const double phase = phase_dist(rng);
      for (std::size_t t = 0; t < cfg.width; ++t) {
        for (std::size_t f = 0; f < cfg.n_filters; ++f) {
          const double arg = 2.0 * 3.14159265358979323846 *
                                 (u * static_cast<double>(t) / static_cast<double>(cfg.width) +
                                  v * static_cast<double>(f) / static_cast<double>(cfg.n_filters)) +
                             phase;
          prototypes[c][t * cfg.n_filters + f] += amp * std::sin(arg);
        }
      }
    }
  }

  // Speaker transforms, in speaker order.
  std::normal_distribution<double> offset_dist(0.0, cfg.speaker_offset_std);
  std::normal_distribution<double> gain_dist(1.0, cfg.speaker_gain_std);
  std::vector<std::vector<double>> offsets(cfg.n_speakers,
                                           std::vector<double>(cfg.n_filters, 0.0));
  std::vector<double> gains(cfg.n_speakers, 1.0);
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    for (std::size_t f = 0; f < cfg.n_filters; ++f) offsets[s][f] = offset_dist(rng);
    gains[s] = gain_dist(rng);
  }

  const std::size_t n = cfg.n_speakers * cfg.frames_per_speaker;
  FrameDataset ds;
  ds.class_count = cfg.class_count;
  ds.features = Tensor({n, dim});
  ds.labels.resize(n);
  ds.speaker_ids.resize(n);
  std::normal_distribution<double> noise_dist(0.0, 1.0);
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    for (std::size_t j = 0; j < cfg.frames_per_speaker; ++j) {
      const std::size_t idx = s * cfg.frames_per_speaker + j;
      const std::size_t c = idx % cfg.class_count;
      ds.labels[idx] = static_cast<int>(c);
      ds.speaker_ids[idx] = static_cast<int>(s);
      double* row = ds.features.raw() + idx * dim;
      for (std::size_t t = 0; t < cfg.width; ++t) {
        for (std::size_t f = 0; f < cfg.n_filters; ++f) {
          const std::size_t col = t * cfg.n_filters + f;
          double v = gains[s] * prototypes[c][col] + offsets[s][f];
          if (cfg.noise_std > 0.0) v += cfg.noise_std * noise_dist(rng);
          row[col] = v;
        }
      }
    }
  }
  return ds;
}

/* Dataset files
 * -------------
 * A text header line "CMDNN1 <n_frames> <dim> <class_count>\n", the feature
 * tensor in the binary tensor format, then n little-endian int32 labels and
 * n little-endian int32 speaker ids.
 */

inline void save_dataset(std::ostream& os, const FrameDataset& ds) {
  validate_dataset(ds);
  os << "CMDNN1 " << ds.size() << ' ' << ds.dim() << ' ' << ds.class_count << '\n';
  write_tensor(os, ds.features);
  for (int label : ds.labels) io::write_i32_le(os, label);
  for (int s : ds.speaker_ids) io::write_i32_le(os, s);
  if (!os) throw std::runtime_error("save_dataset: stream write failed");
}

inline void save_dataset(const std::string& path, const FrameDataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
  save_dataset(os, ds);
}

inline FrameDataset load_dataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("load_dataset: missing header line");
  }
  std::istringstream header(line);
  std::string magic;
  std::size_t n = 0, dim = 0, class_count = 0;
  header >> magic >> n >> dim >> class_count;
  if (!header || magic != "CMDNN1") {
    throw std::runtime_error("load_dataset: bad header '" + line + "'");
  }
  FrameDataset ds;
  ds.class_count = class_count;
  ds.features = read_tensor(is);
  if (ds.features.rank() != 2 || ds.features.dim(0) != n || ds.features.dim(1) != dim) {
    throw std::runtime_error("load_dataset: feature tensor " +
                             ds.features.shape_string() + " does not match header [" +
                             std::to_string(n) + "," + std::to_string(dim) + "]");
  }
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = io::read_i32_le(is, "labels");
  ds.speaker_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.speaker_ids[i] = io::read_i32_le(is, "speaker ids");
  }
  validate_dataset(ds);
  return ds;
}

inline FrameDataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
  return load_dataset(is);
}

}  // namespace cmdnn

#endif  // CMDNN_DATASET_HPP_
