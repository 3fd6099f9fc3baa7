// tools/cmdnn_main.cpp

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

// Command-line front end: dataset synthesis, feature extraction, single
// training runs, and config-driven experiment grids.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmdnn/cmdnn.hpp"

namespace {

namespace fs = std::filesystem;

int speaker_from_filename(const fs::path& path, int fallback) {
  const std::string stem = path.stem().string();
  for (std::size_t i = 0; i < stem.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(stem[i]))) {
      std::size_t j = i;
      while (j < stem.size() && std::isdigit(static_cast<unsigned char>(stem[j]))) ++j;
      return std::stoi(stem.substr(i, j - i));
    }
  }
  return fallback;
}

/// Frame labels come from a sidecar "<stem>.lab" next to the audio file
/// (whitespace-separated integers, one per analysis frame); without one,
/// every frame is labeled 0.
std::vector<int> load_frame_labels(const fs::path& audio_path, std::size_t n_frames) {
  fs::path lab = audio_path;
  lab.replace_extension(".lab");
  std::vector<int> labels;
  std::ifstream is(lab);
  if (!is) return std::vector<int>(n_frames, 0);
  int v = 0;
  while (is >> v) labels.push_back(v);
  if (labels.size() != n_frames) {
    std::ostringstream msg;
    msg << lab.string() << ": " << labels.size() << " labels for " << n_frames
        << " frames of " << audio_path.string();
    throw std::runtime_error(msg.str());
  }
  return labels;
}

struct FeatureJob {
  std::string input;
  std::string out;
  double raw_rate = 16000.0;
  std::size_t n_filters = 24;
  std::size_t width = 15;
  double win_ms = 23.0;
  bool no_normalize = false;
  std::size_t class_count = 30;
};

int run_features(const FeatureJob& job) {
  std::vector<fs::path> files;
  if (fs::is_directory(job.input)) {
    for (const auto& entry : fs::directory_iterator(job.input)) {
      if (!entry.is_regular_file()) continue;
      const std::string ext = entry.path().extension().string();
      if (ext == ".wav" || ext == ".raw" || ext == ".pcm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw std::runtime_error("features: no .wav/.raw/.pcm files in " + job.input);
    }
  } else if (fs::exists(job.input)) {
    files.emplace_back(job.input);
  } else {
    throw std::runtime_error("features: input not found: " + job.input);
  }

  cmdnn::FeatureConfig fc;
  fc.n_filters = job.n_filters;
  fc.win_ms = job.win_ms;
  fc.context_width = job.width;
  fc.normalize = !job.no_normalize;

  std::vector<cmdnn::Tensor> per_file;
  std::vector<std::vector<int>> file_labels;
  std::vector<int> file_speakers;
  std::size_t total_frames = 0;
  for (std::size_t fi = 0; fi < files.size(); ++fi) {
    const std::string ext = files[fi].extension().string();
    const cmdnn::AudioSignal sig =
        ext == ".wav" ? cmdnn::read_wav_file(files[fi].string())
                      : cmdnn::read_raw_pcm16_file(files[fi].string(), job.raw_rate);
    cmdnn::Tensor coeffs = cmdnn::lhcb_frames(sig, fc);
    file_labels.push_back(load_frame_labels(files[fi], coeffs.dim(0)));
    file_speakers.push_back(speaker_from_filename(files[fi], static_cast<int>(fi)));
    total_frames += coeffs.dim(0);
    per_file.push_back(std::move(coeffs));
  }

  cmdnn::Tensor all({total_frames, job.n_filters});
  std::size_t row = 0;
  for (const cmdnn::Tensor& t : per_file) {
    std::copy(t.raw(), t.raw() + t.size(), all.raw() + row * job.n_filters);
    row += t.dim(0);
  }
  const cmdnn::FeatureStats stats = cmdnn::compute_feature_stats(all);

  cmdnn::FrameDataset ds;
  ds.class_count = job.class_count;
  ds.features = cmdnn::Tensor({total_frames, job.width * job.n_filters});
  row = 0;
  for (std::size_t fi = 0; fi < per_file.size(); ++fi) {
    cmdnn::Tensor frames = fc.normalize
                               ? cmdnn::apply_feature_norm(per_file[fi], stats)
                               : per_file[fi];
    const cmdnn::Tensor stacked = cmdnn::stack_context(frames, job.width);
    std::copy(stacked.raw(), stacked.raw() + stacked.size(),
              ds.features.raw() + row * stacked.dim(1));
    for (std::size_t t = 0; t < stacked.dim(0); ++t) {
      ds.labels.push_back(file_labels[fi][t]);
      ds.speaker_ids.push_back(file_speakers[fi]);
    }
    row += stacked.dim(0);
  }
  cmdnn::save_dataset(job.out, ds);

  std::ofstream manifest(job.out + ".manifest");
  if (!manifest) throw std::runtime_error("features: cannot write " + job.out + ".manifest");
  manifest << std::setprecision(std::numeric_limits<double>::max_digits10);
  manifest << "n_frames " << total_frames << '\n';
  manifest << "n_filters " << job.n_filters << '\n';
  manifest << "width " << job.width << '\n';
  manifest << "normalize " << (fc.normalize ? 1 : 0) << '\n';
  manifest << "mean";
  for (std::size_t j = 0; j < job.n_filters; ++j) manifest << ' ' << stats.mean[j];
  manifest << '\n' << "stdev";
  for (std::size_t j = 0; j < job.n_filters; ++j) manifest << ' ' << stats.stdev[j];
  manifest << '\n';

  std::cout << "wrote " << job.out << ": " << total_frames << " frames of dim "
            << job.width * job.n_filters << " from " << files.size() << " file(s)\n";
  return 0;
}

struct TrainJob {
  std::string structure;
  std::optional<cmdnn::NeuronModel> neuron;
  std::optional<cmdnn::AxisMode> share;
  std::optional<double> dropout;
  std::string data;
  std::string out;
  cmdnn::RunConfig rc;
  std::uint64_t seed = 0;
};

int run_train(const TrainJob& job) {
  const cmdnn::FrameDataset ds = cmdnn::load_dataset(job.data);
  cmdnn::StructureSpec spec = cmdnn::parse_structure_spec(job.structure);
  cmdnn::detail::apply_entry_options(spec, job.neuron, job.share, job.dropout);

  fs::create_directories(job.out);
  cmdnn::ExperimentRun run = cmdnn::run_experiment(spec, ds, job.rc, job.seed, &std::cout);

  {
    std::ofstream os(job.out + "/results.csv", std::ios::binary);
    if (!os) throw std::runtime_error("train: cannot write " + job.out + "/results.csv");
    os << cmdnn::results_csv_header() << '\n';
    cmdnn::write_result_row(os, run.result);
  }
  {
    std::ofstream os(job.out + "/curves.csv", std::ios::binary);
    if (!os) throw std::runtime_error("train: cannot write " + job.out + "/curves.csv");
    os << cmdnn::epoch_csv_header() << '\n';
    for (const cmdnn::EpochRecord& rec : run.records) cmdnn::write_epoch_record(os, rec);
  }
  {
    std::ofstream os(job.out + "/weights.bin", std::ios::binary);
    if (!os) throw std::runtime_error("train: cannot write " + job.out + "/weights.bin");
    cmdnn::save_network(os, run.net);
  }
  std::cout << "best acc " << run.result.acc << "% at epoch " << run.result.epochs
            << " (" << run.records.size() << " epochs run)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convolutional maxout network laboratory"};
  app.require_subcommand(1);

  // synth
  cmdnn::SynthConfig synth_cfg;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic frame dataset");
  synth->add_option("--speakers", synth_cfg.n_speakers, "Number of speakers");
  synth->add_option("--frames-per-speaker", synth_cfg.frames_per_speaker,
                    "Frames per speaker");
  synth->add_option("--filters", synth_cfg.n_filters, "Filter bank size");
  synth->add_option("--width", synth_cfg.width, "Context width in frames");
  synth->add_option("--classes", synth_cfg.class_count, "Number of classes");
  synth->add_option("--noise", synth_cfg.noise_std, "Frame noise level");
  synth->add_option("--offset-std", synth_cfg.speaker_offset_std,
                    "Per-speaker filter offset spread");
  synth->add_option("--gain-std", synth_cfg.speaker_gain_std, "Per-speaker gain spread");
  synth->add_option("--seed", synth_cfg.seed, "Generator seed");
  synth->add_option("--out", synth_out, "Output dataset file")->required();

  // features
  FeatureJob feat;
  CLI::App* features =
      app.add_subcommand("features", "Extract stacked filter-bank features from audio");
  features->add_option("input", feat.input, "WAV directory, WAV file, or raw PCM16 file")
      ->required();
  features->add_option("--out", feat.out, "Output dataset file")->required();
  features->add_option("--rate", feat.raw_rate, "Sample rate for raw PCM input");
  features->add_option("--filters", feat.n_filters, "Filter bank size");
  features->add_option("--width", feat.width, "Context width in frames");
  features->add_option("--win-ms", feat.win_ms, "Analysis window in milliseconds");
  features->add_option("--classes", feat.class_count, "Class count of the dataset");
  features->add_flag("--no-normalize", feat.no_normalize,
                     "Skip per-coefficient mean/variance normalization");

  // shared train/grid knobs
  auto add_run_options = [](CLI::App* cmd, cmdnn::RunConfig& rc) {
    cmd->add_option("--epochs", rc.train.max_epochs, "Maximum training epochs");
    cmd->add_option("--batch", rc.train.batch_size, "Mini-batch size");
    cmd->add_option("--lr", rc.train.initial_lr, "Initial learning rate");
    cmd->add_option("--halvings", rc.train.halving_limit, "Halving strikes before stop");
    cmd->add_option("--test-speakers", rc.test_speakers, "Held-out speaker count");
    cmd->add_option("--context", rc.context_width, "Context width of the dataset");
    cmd->add_option("--filters", rc.n_filters, "Filter count of the dataset");
    cmd->add_option("--maxout-k", rc.maxout_group, "Maxout group size");
    cmd->add_option("--pretrain-epochs", rc.pretrain.epochs_per_layer,
                    "Pretraining epochs per layer");
    cmd->add_option("--pretrain-lr", rc.pretrain.lr, "Pretraining learning rate");
  };

  // train
  TrainJob train_job;
  std::string train_neuron, train_share;
  double train_dropout = 0.0, train_max_norm = 0.0;
  bool train_no_auto_norm = false;
  CLI::App* train = app.add_subcommand("train", "Train one structure on a dataset");
  train->add_option("--structure", train_job.structure, "Structure string")->required();
  CLI::Option* train_neuron_opt =
      train->add_option("--neuron", train_neuron, "Neuron model: sigmoid, relu, maxout");
  CLI::Option* train_share_opt =
      train->add_option("--share", train_share, "Weight-sharing axis: T, F, or TF");
  CLI::Option* train_dropout_opt =
      train->add_option("--dropout", train_dropout, "Dropout keep probability");
  CLI::Option* train_max_norm_opt =
      train->add_option("--max-norm", train_max_norm, "Max-norm radius C");
  train->add_flag("--no-auto-max-norm", train_no_auto_norm,
                  "Disable the automatic C=2 constraint for relu/maxout nets");
  train->add_option("--data", train_job.data, "Dataset file")->required();
  train->add_option("--out", train_job.out, "Output run directory")->required();
  train->add_option("--seed", train_job.seed, "Run seed");
  add_run_options(train, train_job.rc);

  // grid
  std::string grid_config, grid_data, grid_out;
  cmdnn::RunConfig grid_rc;
  double grid_max_norm = 0.0;
  bool grid_no_auto_norm = false;
  std::uint64_t grid_seed_base = 0;
  CLI::App* grid = app.add_subcommand("grid", "Run a config-driven experiment grid");
  grid->add_option("--config", grid_config, "Grid config file")->required();
  grid->add_option("--data", grid_data, "Dataset file")->required();
  grid->add_option("--out", grid_out, "Output directory")->required();
  CLI::Option* grid_max_norm_opt =
      grid->add_option("--max-norm", grid_max_norm, "Max-norm radius C");
  grid->add_flag("--no-auto-max-norm", grid_no_auto_norm,
                 "Disable the automatic C=2 constraint for relu/maxout nets");
  grid->add_option("--seed", grid_seed_base, "Base seed added to each entry seed");
  add_run_options(grid, grid_rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) {
      const cmdnn::FrameDataset ds = cmdnn::make_synth_dataset(synth_cfg);
      cmdnn::save_dataset(synth_out, ds);
      std::cout << "wrote " << synth_out << ": " << ds.size() << " frames of dim "
                << ds.dim() << ", " << ds.class_count << " classes, "
                << synth_cfg.n_speakers << " speakers\n";
      return 0;
    }
    if (*features) {
      return run_features(feat);
    }
    if (*train) {
      if (train_neuron_opt->count()) {
        train_job.neuron = cmdnn::neuron_from_name(train_neuron);
      }
      if (train_share_opt->count()) {
        train_job.share = cmdnn::axis_mode_from_name(train_share);
      }
      if (train_dropout_opt->count()) train_job.dropout = train_dropout;
      if (train_max_norm_opt->count()) train_job.rc.train.max_norm_C = train_max_norm;
      train_job.rc.train.auto_max_norm = !train_no_auto_norm;
      return run_train(train_job);
    }
    if (*grid) {
      if (grid_max_norm_opt->count()) grid_rc.train.max_norm_C = grid_max_norm;
      grid_rc.train.auto_max_norm = !grid_no_auto_norm;
      const cmdnn::FrameDataset ds = cmdnn::load_dataset(grid_data);
      std::ifstream cfg(grid_config);
      if (!cfg) throw std::runtime_error("grid: cannot open config " + grid_config);
      std::vector<cmdnn::GridEntry> entries = cmdnn::parse_grid_config(cfg);
      if (grid_seed_base != 0) {
        for (cmdnn::GridEntry& e : entries) {
          for (std::uint64_t& s : e.seeds) s += grid_seed_base;
        }
      }
      const cmdnn::GridOutcome outcome =
          cmdnn::run_grid(entries, ds, grid_rc, grid_out, &std::cout);
      std::cout << cmdnn::render_table(outcome);
      return outcome.all_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
