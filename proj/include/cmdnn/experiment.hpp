// cmdnn/experiment.hpp

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

#ifndef CMDNN_EXPERIMENT_HPP_
#define CMDNN_EXPERIMENT_HPP_

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdnn/dataset.hpp"
#include "cmdnn/network.hpp"
#include "cmdnn/pretraining.hpp"
#include "cmdnn/structure.hpp"
#include "cmdnn/training.hpp"

namespace cmdnn {

/* Single runs
 * -----------
 */

struct RunConfig {
  TrainConfig train;
  PretrainConfig pretrain;
  std::size_t test_speakers = 7;
  std::size_t context_width = 15;
  std::size_t n_filters = 24;
  std::size_t maxout_group = 2;
};

struct ExperimentResult {
  std::string structure;
  std::string neuron;
  std::string share;  // "-" for fully connected nets
  std::optional<double> dropout_keep;
  std::uint64_t seed = 0;
  double acc = 0.0;
  std::size_t epochs = 0;  // epoch that reached the best accuracy
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct ExperimentRun {
  ExperimentResult result;
  std::vector<EpochRecord> records;
  Network net;  // best snapshot after training
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace detail

/// Build, optionally pretrain, and train one structure with one seed. The
/// seed governs initialization, pretraining, and the training shuffle; a
/// fixed (spec, dataset, config, seed) tuple maps to one result.
inline ExperimentRun run_experiment(const StructureSpec& spec, const FrameDataset& ds,
                                    const RunConfig& rc, std::uint64_t seed,
                                    std::ostream* log = nullptr) {
  if (ds.dim() != rc.context_width * rc.n_filters) {
    std::ostringstream msg;
    msg << "run_experiment: dataset dim " << ds.dim() << " does not equal context "
        << rc.context_width << " x " << rc.n_filters << " filters";
    throw std::invalid_argument(msg.str());
  }
  const auto t0 = std::chrono::steady_clock::now();
  const DatasetSplit split = default_split(ds, rc.test_speakers);
  const NetworkConfig config = to_network_config(spec, rc.context_width, rc.n_filters,
                                                 ds.class_count, rc.maxout_group);
  Network net = build_network(config, seed);
  if (spec.pretrain) {
    PretrainConfig pc = rc.pretrain;
    pc.seed = seed;
    pretrain_stack(net, split.train.features, pc, log);
  }
  TrainConfig tc = rc.train;
  tc.seed = seed;
  ExperimentRun run;
  TrainResult tr = train(net, split.train, split.test, tc, nullptr, log);
  const auto t1 = std::chrono::steady_clock::now();

  run.records = std::move(tr.records);
  run.net = std::move(net);
  run.result.structure = spec.text;
  run.result.neuron = neuron_name(spec.neuron);
  run.result.share = spec.share ? share_label(*spec.share) : "-";
  run.result.dropout_keep = spec.dropout_keep;
  run.result.seed = seed;
  run.result.acc = tr.state.best_acc;
  run.result.epochs = tr.state.best_epoch;
  run.result.seconds = std::chrono::duration<double>(t1 - t0).count();
  return run;
}

/* Grid configs
 * ------------
 * One entry per line: a structure string plus key=value flags anywhere on
 * the line (neuron=, share=, dropout=, seed=, seeds=). '#' starts a comment.
 */

struct GridEntry {
  StructureSpec spec;
  std::vector<std::uint64_t> seeds{0};
};

namespace detail {

inline void apply_entry_options(StructureSpec& spec,
                                const std::optional<NeuronModel>& neuron,
                                const std::optional<AxisMode>& share,
                                const std::optional<double>& dropout) {
  if (neuron) {
    if (spec.form == StructureSpec::Form::kFc) {
      spec.neuron = *neuron;
    } else if (spec.neuron != *neuron) {
      throw std::invalid_argument(std::string("grid: '") + spec.text + "' requires " +
                                  neuron_name(spec.neuron) + " units");
    }
  } else if (spec.form == StructureSpec::Form::kFc) {
    throw std::invalid_argument("grid: structure '" + spec.text +
                                "' needs an explicit neuron= flag");
  }
  if (share) spec.share = *share;
  if (spec.form == StructureSpec::Form::kConv && spec.conv_dims == 2 && !spec.share) {
    spec.share = AxisMode::kBoth;
  }
  if (dropout) spec.dropout_keep = DropoutSpec(*dropout).keep_prob;
}

}  // namespace detail

inline std::vector<GridEntry> parse_grid_config(std::istream& is) {
  std::vector<GridEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> structure_tokens;
    std::optional<NeuronModel> neuron;
    std::optional<AxisMode> share;
    std::optional<double> dropout;
    std::vector<std::uint64_t> seeds;
    std::string tok;
    try {
      while (ls >> tok) {
        const std::size_t eq = tok.find('=');
        if (eq == std::string::npos) {
          structure_tokens.push_back(tok);
          continue;
        }
        const std::string key = tok.substr(0, eq);
        const std::string value = tok.substr(eq + 1);
        if (key == "neuron") {
          neuron = neuron_from_name(value);
        } else if (key == "share") {
          share = axis_mode_from_name(value);
        } else if (key == "dropout") {
          dropout = std::stod(value);
        } else if (key == "seed") {
          seeds.assign(1, std::stoull(value));
        } else if (key == "seeds") {
          const std::uint64_t count = std::stoull(value);
          if (count == 0) throw std::invalid_argument("grid: seeds=0");
          seeds.clear();
          for (std::uint64_t s = 0; s < count; ++s) seeds.push_back(s);
        } else {
          throw std::invalid_argument("grid: unknown flag '" + key + "'");
        }
      }
      if (structure_tokens.empty()) continue;  // blank or comment-only line
      std::ostringstream text;
      for (std::size_t i = 0; i < structure_tokens.size(); ++i) {
        if (i) text << ' ';
        text << structure_tokens[i];
      }
      GridEntry entry;
      entry.spec = parse_structure_spec(text.str());
      detail::apply_entry_options(entry.spec, neuron, share, dropout);
      if (!seeds.empty()) entry.seeds = seeds;
      entries.push_back(std::move(entry));
    } catch (const std::exception& e) {
      throw std::invalid_argument("grid config line " + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return entries;
}

/* Result files
 * ------------
 */

inline const char* results_csv_header() {
  return "structure,neuron,share,dropout,seed,acc,epochs,seconds";
}

inline void write_result_row(std::ostream& os, const ExperimentResult& r) {
  os << r.structure << ',' << r.neuron << ',' << r.share << ','
     << (r.dropout_keep ? detail::format_double(*r.dropout_keep) : std::string("-")) << ','
     << r.seed << ',';
  if (r.failed) {
    os << "FAILED,-,-\n";
  } else {
    os << detail::format_double(r.acc) << ',' << r.epochs << ','
       << detail::format_double(r.seconds) << '\n';
  }
}

namespace detail {

inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
    os << content;
    if (!os) throw std::runtime_error("write to " + tmp + " failed");
  }
  std::filesystem::rename(tmp, path);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string format_keep(const std::optional<double>& keep) {
  if (!keep) return "-";
  std::ostringstream os;
  os << std::setprecision(3) << *keep;
  return os.str();
}

}  // namespace detail

struct GridOutcome {
  std::vector<GridEntry> entries;
  std::vector<std::vector<ExperimentResult>> per_entry;  // aligned with entries
  std::vector<std::vector<EpochRecord>> curves;          // one per flat run
  bool all_ok = true;
};

inline std::string render_results_csv(const GridOutcome& outcome) {
  std::ostringstream os;
  os << results_csv_header() << '\n';
  for (const auto& results : outcome.per_entry) {
    for (const ExperimentResult& r : results) write_result_row(os, r);
  }
  return os.str();
}

inline std::string render_curves_csv(const GridOutcome& outcome) {
  std::ostringstream os;
  os << "structure,neuron,share,dropout,seed,epoch,loss,acc,lr,seconds\n";
  std::size_t flat = 0;
  for (const auto& results : outcome.per_entry) {
    for (const ExperimentResult& r : results) {
      if (flat < outcome.curves.size()) {
        for (const EpochRecord& rec : outcome.curves[flat]) {
          os << r.structure << ',' << r.neuron << ',' << r.share << ','
             << (r.dropout_keep ? detail::format_double(*r.dropout_keep) : std::string("-"))
             << ',' << r.seed << ',' << rec.epoch << ','
             << detail::format_double(rec.train_loss) << ','
             << detail::format_double(rec.eval_acc) << ','
             << detail::format_double(rec.lr) << ','
             << detail::format_double(rec.seconds) << '\n';
        }
      }
      ++flat;
    }
  }
  return os.str();
}

/// Aligned text table in the layout of the result tables: one line per grid
/// entry with median accuracy (and min–max range) over its seeds.
inline std::string render_table(const GridOutcome& outcome) {
  std::ostringstream os;
  os << std::left << std::setw(44) << "Structure" << std::setw(9) << "Neuron"
     << std::setw(7) << "Share" << std::setw(6) << "D" << std::setw(7) << "Seeds"
     << std::setw(8) << "Epoch" << std::setw(11) << "Time(s)" << std::setw(9) << "Acc"
     << "Range" << '\n';
  for (const auto& results : outcome.per_entry) {
    if (results.empty()) continue;
    const ExperimentResult& first = results.front();
    std::vector<double> accs, epochs, seconds;
    bool any_failed = false;
    for (const ExperimentResult& r : results) {
      if (r.failed) {
        any_failed = true;
        continue;
      }
      accs.push_back(r.acc);
      epochs.push_back(static_cast<double>(r.epochs));
      seconds.push_back(r.seconds);
    }
    os << std::left << std::setw(44) << first.structure << std::setw(9) << first.neuron
       << std::setw(7) << first.share << std::setw(6)
       << detail::format_keep(first.dropout_keep) << std::setw(7) << results.size();
    if (accs.empty()) {
      os << std::setw(8) << "-" << std::setw(11) << "-" << std::setw(9) << "FAILED"
         << "-";
    } else {
      const double acc_med = detail::median(accs);
      const double range = *std::max_element(accs.begin(), accs.end()) -
                           *std::min_element(accs.begin(), accs.end());
      os << std::fixed << std::setprecision(1) << std::setw(8) << detail::median(epochs)
         << std::setw(11) << detail::median(seconds) << std::setprecision(2)
         << std::setw(9) << acc_med << std::setprecision(2) << range;
      os.unsetf(std::ios::fixed);
      os << std::setprecision(6);
      if (any_failed) os << "  [some seeds FAILED]";
    }
    os << '\n';
  }
  return os.str();
}

/// Run every entry over its seeds, rewriting the three output files after
/// each completed run so partial progress is always on disk. A failed run is
/// recorded in place of its results; all_ok reflects whether every run
/// finished.
inline GridOutcome run_grid(const std::vector<GridEntry>& entries, const FrameDataset& ds,
                            const RunConfig& rc, const std::string& out_dir,
                            std::ostream* log = nullptr) {
  if (entries.empty()) {
    throw std::invalid_argument("run_grid: no grid entries given");
  }
  std::filesystem::create_directories(out_dir);
  GridOutcome outcome;
  outcome.entries = entries;
  outcome.per_entry.resize(entries.size());

  const std::string results_path = out_dir + "/results.csv";
  const std::string curves_path = out_dir + "/curves.csv";
  const std::string table_path = out_dir + "/table.txt";

  for (std::size_t ei = 0; ei < entries.size(); ++ei) {
    for (std::uint64_t seed : entries[ei].seeds) {
      ExperimentResult result;
      std::vector<EpochRecord> records;
      try {
        ExperimentRun run = run_experiment(entries[ei].spec, ds, rc, seed, log);
        result = std::move(run.result);
        records = std::move(run.records);
      } catch (const std::exception& e) {
        result.structure = entries[ei].spec.text;
        result.neuron = neuron_name(entries[ei].spec.neuron);
        result.share = entries[ei].spec.share ? share_label(*entries[ei].spec.share) : "-";
        result.dropout_keep = entries[ei].spec.dropout_keep;
        result.seed = seed;
        result.failed = true;
        result.error = e.what();
        outcome.all_ok = false;
        if (log) {
          *log << "run FAILED " << result.structure << " seed " << seed << ": "
               << e.what() << '\n';
        }
      }
      if (log && !result.failed) {
        *log << "run done " << result.structure << " [" << result.neuron << "] seed "
             << seed << " acc " << result.acc << " epochs " << result.epochs << '\n';
      }
      outcome.per_entry[ei].push_back(std::move(result));
      outcome.curves.push_back(std::move(records));
      detail::atomic_write(results_path, render_results_csv(outcome));
      detail::atomic_write(curves_path, render_curves_csv(outcome));
      detail::atomic_write(table_path, render_table(outcome));
    }
  }
  return outcome;
}

}  // namespace cmdnn

#endif  // CMDNN_EXPERIMENT_HPP_
