// tests/test_experiment.cpp

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

// Structure-string parsing, grid configuration, experiment runs, and result
// rendering.

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "cmdnn/cmdnn.hpp"

using Catch::Matchers::ContainsSubstring;
using cmdnn::AxisMode;
using cmdnn::NeuronModel;
using cmdnn::StructureSpec;

namespace {

/// Ops of the layer specs in a lowered config, as single letters for terse
/// sequence assertions: c=conv p=pool f=flatten m=maxout d=dense a=activation
/// o=dropout.
std::string op_string(const cmdnn::NetworkConfig& cfg) {
  std::string ops;
  for (const cmdnn::LayerSpec& l : cfg.layers) {
    switch (l.op) {
      case cmdnn::LayerOp::kConv: ops += 'c'; break;
      case cmdnn::LayerOp::kMaxPool: ops += 'p'; break;
      case cmdnn::LayerOp::kFlatten: ops += 'f'; break;
      case cmdnn::LayerOp::kMaxout: ops += 'm'; break;
      case cmdnn::LayerOp::kDense: ops += 'd'; break;
      case cmdnn::LayerOp::kActivation: ops += 'a'; break;
      case cmdnn::LayerOp::kDropout: ops += 'o'; break;
    }
  }
  return ops;
}

cmdnn::FrameDataset tiny_dataset(std::uint64_t seed = 1) {
  cmdnn::SynthConfig cfg;
  cfg.n_speakers = 10;
  cfg.frames_per_speaker = 12;
  cfg.n_filters = 4;
  cfg.width = 3;
  cfg.class_count = 5;
  cfg.seed = seed;
  return cmdnn::make_synth_dataset(cfg);
}

cmdnn::RunConfig tiny_run_config() {
  cmdnn::RunConfig rc;
  rc.context_width = 3;
  rc.n_filters = 4;
  rc.test_speakers = 2;
  rc.train.max_epochs = 3;
  rc.train.batch_size = 16;
  rc.pretrain.epochs_per_layer = 1;
  return rc;
}

}  // namespace

TEST_CASE("fully connected structure strings") {
  StructureSpec spec = cmdnn::parse_structure_spec("FC-3hidden-400");
  REQUIRE(spec.form == StructureSpec::Form::kFc);
  REQUIRE(spec.fc_widths == std::vector<std::size_t>{400, 400, 400});
  REQUIRE(spec.text == "FC-3hidden-400");
  REQUIRE_FALSE(spec.pretrain);

  SECTION("lowering with maxout units yields three maxout hidden layers") {
    spec.neuron = NeuronModel::kMaxout;
    cmdnn::NetworkConfig cfg = cmdnn::to_network_config(spec, 15, 24);
    REQUIRE(op_string(cfg) == "mmmd");
    REQUIRE(cfg.input_shape == std::vector<std::size_t>{360});
    REQUIRE(cfg.class_count == 30);
  }
  SECTION("sigmoid hidden layers carry biases and an activation") {
    cmdnn::NetworkConfig cfg = cmdnn::to_network_config(spec, 15, 24);
    REQUIRE(op_string(cfg) == "dadadad");
  }
  SECTION("relu hidden layers drop the bias") {
    spec.neuron = NeuronModel::kRelu;
    cmdnn::NetworkConfig cfg = cmdnn::to_network_config(spec, 15, 24);
    REQUIRE(op_string(cfg) == "dadadad");
    REQUIRE_FALSE(cfg.layers[0].use_bias);
    REQUIRE(cfg.layers.back().use_bias);
  }
}

TEST_CASE("zero hidden layers are rejected") {
  REQUIRE_THROWS_MATCHES(cmdnn::parse_structure_spec("FC-0hidden-400"),
                         std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("zero hidden")));
}

TEST_CASE("malformed structure strings") {
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec(""), std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("FC-xhidden-4"), std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("FC-2hidden-0"), std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("FC-2hidden-400 extra"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("3D-CMNN C4 K3 S2 F32"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("1D-CMNN F600"), std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("1D-CMNN C4 K3 S2"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("1D-CMNN C4 X3 S2 F6"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("2D-CMNN C4 K3 S2 G6"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("Pre-trained_FC"), std::invalid_argument);
  REQUIRE_THROWS_AS(cmdnn::parse_structure_spec("Pre-trained_FC 500-x-400"),
                    std::invalid_argument);
}

TEST_CASE("pretrained stacks force sigmoid units and the pretraining flag") {
  StructureSpec spec = cmdnn::parse_structure_spec("Pre-trained_FC 500-500-400-400-400");
  REQUIRE(spec.form == StructureSpec::Form::kPretrainedFc);
  REQUIRE(spec.fc_widths == std::vector<std::size_t>{500, 500, 400, 400, 400});
  REQUIRE(spec.neuron == NeuronModel::kSigmoid);
  REQUIRE(spec.pretrain);
  REQUIRE_THROWS_AS(
      cmdnn::parse_structure("Pre-trained_FC 500-400", NeuronModel::kRelu, 15, 24),
      std::invalid_argument);
}

TEST_CASE("convolutional structure strings") {
  StructureSpec spec = cmdnn::parse_structure_spec("2D-CMNN C40 K7 S2 F400 F400");
  REQUIRE(spec.form == StructureSpec::Form::kConv);
  REQUIRE(spec.conv_dims == 2);
  REQUIRE(spec.neuron == NeuronModel::kMaxout);
  REQUIRE(spec.blocks.size() == 1);
  REQUIRE(spec.blocks[0].channels == 40);
  REQUIRE(spec.blocks[0].kernel == 7);
  REQUIRE(spec.blocks[0].pool == 2);
  REQUIRE(spec.fc_widths == std::vector<std::size_t>{400, 400});

  SECTION("lowering produces one conv block, pooling, then the maxout stack") {
    spec.share = AxisMode::kBoth;
    cmdnn::NetworkConfig cfg = cmdnn::to_network_config(spec, 15, 24);
    REQUIRE(op_string(cfg) == "cpfmmd");
    REQUIRE(cfg.input_shape == std::vector<std::size_t>{1, 24, 15});
    REQUIRE(cfg.layers[0].kernel_h == 7);
    REQUIRE(cfg.layers[0].kernel_w == 7);
  }
  SECTION("pooling of size one is omitted") {
    StructureSpec s1 = cmdnn::parse_structure_spec("2D-CMNN C8 K3 S1 F32");
    s1.share = AxisMode::kBoth;
    cmdnn::NetworkConfig cfg = cmdnn::to_network_config(s1, 15, 24);
    REQUIRE(op_string(cfg) == "cfmd");
  }
  SECTION("a 1D structure extends kernels along the shared axis only") {
    StructureSpec s = cmdnn::parse_structure_spec("1D-CMNN C80 K5 S2 F600");
    s.share = AxisMode::kTimeOnly;
    cmdnn::NetworkConfig t = cmdnn::to_network_config(s, 15, 24);
    REQUIRE(t.layers[0].kernel_h == 1);
    REQUIRE(t.layers[0].kernel_w == 5);
    REQUIRE(t.layers[1].pool_h == 1);
    REQUIRE(t.layers[1].pool_w == 2);
    s.share = AxisMode::kFrequencyOnly;
    cmdnn::NetworkConfig f = cmdnn::to_network_config(s, 15, 24);
    REQUIRE(f.layers[0].kernel_h == 5);
    REQUIRE(f.layers[0].kernel_w == 1);
    REQUIRE(f.layers[1].pool_h == 2);
    REQUIRE(f.layers[1].pool_w == 1);
  }
}

TEST_CASE("sharing-axis rules") {
  StructureSpec one_d = cmdnn::parse_structure_spec("1D-CMNN C8 K3 S2 F32");
  SECTION("1D requires an explicit axis") {
    REQUIRE_THROWS_AS(cmdnn::to_network_config(one_d, 15, 24), std::invalid_argument);
  }
  SECTION("1D cannot share along both axes") {
    one_d.share = AxisMode::kBoth;
    REQUIRE_THROWS_AS(cmdnn::to_network_config(one_d, 15, 24), std::invalid_argument);
  }
  SECTION("2D must share along both axes") {
    StructureSpec two_d = cmdnn::parse_structure_spec("2D-CMNN C8 K3 S2 F32");
    two_d.share = AxisMode::kTimeOnly;
    REQUIRE_THROWS_AS(cmdnn::to_network_config(two_d, 15, 24), std::invalid_argument);
  }
  SECTION("2D defaults to sharing along both axes in the one-call form") {
    REQUIRE_NOTHROW(
        cmdnn::parse_structure("2D-CMNN C8 K3 S2 F32", NeuronModel::kMaxout, 15, 24));
  }
  SECTION("conv structures reject non-maxout units") {
    REQUIRE_THROWS_AS(cmdnn::parse_structure("2D-CMNN C8 K3 S2 F32",
                                             NeuronModel::kSigmoid, 15, 24),
                      std::invalid_argument);
  }
}

TEST_CASE("a kernel larger than the context window cannot be built") {
  cmdnn::NetworkConfig cfg = cmdnn::parse_structure("2D-CMNN C4 K7 S2 F32",
                                                    NeuronModel::kMaxout, 6, 24);
  REQUIRE_THROWS_AS(cmdnn::build_network(cfg, 0), std::invalid_argument);
}

TEST_CASE("dropout follows fully connected hidden layers only") {
  SECTION("in a conv structure") {
    cmdnn::NetworkConfig cfg =
        cmdnn::parse_structure("2D-CMNN C40 K7 S2 F400 F400", NeuronModel::kMaxout, 15,
                               24, std::nullopt, 0.5);
    REQUIRE(op_string(cfg) == "cpfmomod");
  }
  SECTION("in a fully connected structure") {
    cmdnn::NetworkConfig cfg = cmdnn::parse_structure("FC-2hidden-100", NeuronModel::kSigmoid,
                                                      15, 24, std::nullopt, 0.5);
    REQUIRE(op_string(cfg) == "daodaod");
  }
  SECTION("the output layer never gets dropout after it") {
    cmdnn::NetworkConfig cfg = cmdnn::parse_structure("FC-1hidden-50", NeuronModel::kMaxout,
                                                      15, 24, std::nullopt, 0.5);
    REQUIRE(op_string(cfg) == "mod");
  }
}

TEST_CASE("the full experiment grid of structures parses and renders back") {
  struct Row {
    const char* structure;
    NeuronModel neuron;
    std::optional<AxisMode> share;
    std::optional<double> dropout;
  };
  const std::vector<Row> rows = {
      {"FC-2hidden-400", NeuronModel::kSigmoid, std::nullopt, std::nullopt},
      {"FC-3hidden-400", NeuronModel::kSigmoid, std::nullopt, std::nullopt},
      {"FC-5hidden-400", NeuronModel::kSigmoid, std::nullopt, std::nullopt},
      {"Pre-trained_FC 500-500-400-400-400", NeuronModel::kSigmoid, std::nullopt,
       std::nullopt},
      {"FC-2hidden-400", NeuronModel::kRelu, std::nullopt, std::nullopt},
      {"FC-4hidden-400", NeuronModel::kRelu, std::nullopt, std::nullopt},
      {"FC-2hidden-200", NeuronModel::kMaxout, std::nullopt, std::nullopt},
      {"FC-2hidden-400", NeuronModel::kMaxout, std::nullopt, std::nullopt},
      {"FC-3hidden-400", NeuronModel::kMaxout, std::nullopt, std::nullopt},
      {"FC-5hidden-400", NeuronModel::kMaxout, std::nullopt, std::nullopt},
      {"FC-6hidden-400", NeuronModel::kMaxout, std::nullopt, std::nullopt},
      {"1D-CMNN C80 K5 S2 F600", NeuronModel::kMaxout, AxisMode::kFrequencyOnly,
       std::nullopt},
      {"1D-CMNN C40 K3 S2 C40 K3 S2 F600", NeuronModel::kMaxout, AxisMode::kTimeOnly,
       std::nullopt},
      {"2D-CMNN C80 K7 S2 F400 F400", NeuronModel::kMaxout, AxisMode::kBoth,
       std::nullopt},
      {"2D-CMNN C40 K7 S2 F400 F400", NeuronModel::kMaxout, AxisMode::kBoth, 0.3},
      {"2D-CMNN C40 K7 S2 F400 F400", NeuronModel::kMaxout, AxisMode::kBoth, 0.5},
      {"2D-CMNN C40 K7 S2 F400 F400", NeuronModel::kMaxout, AxisMode::kBoth, 0.7},
  };
  REQUIRE(rows.size() == 17);
  for (const Row& row : rows) {
    StructureSpec spec = cmdnn::parse_structure_spec(row.structure);
    REQUIRE(cmdnn::render_structure(spec) == row.structure);
    REQUIRE(spec.text == row.structure);
    REQUIRE_NOTHROW(cmdnn::parse_structure(row.structure, row.neuron, 15, 24, row.share,
                                           row.dropout));
  }
}

TEST_CASE("grid configuration files") {
  SECTION("flags, comments, and seed expansion") {
    std::istringstream is(
        "# leading comment\n"
        "\n"
        "FC-2hidden-16 neuron=maxout seeds=3\n"
        "FC-1hidden-8 neuron=sigmoid seed=7   # trailing comment\n"
        "1D-CMNN C4 K3 S2 F16 share=T dropout=0.5\n");
    std::vector<cmdnn::GridEntry> entries = cmdnn::parse_grid_config(is);
    REQUIRE(entries.size() == 3);
    REQUIRE(entries[0].spec.neuron == NeuronModel::kMaxout);
    REQUIRE(entries[0].seeds == std::vector<std::uint64_t>{0, 1, 2});
    REQUIRE(entries[1].seeds == std::vector<std::uint64_t>{7});
    REQUIRE(entries[2].spec.share == AxisMode::kTimeOnly);
    REQUIRE(entries[2].spec.dropout_keep == 0.5);
    REQUIRE(entries[2].seeds == std::vector<std::uint64_t>{0});
  }
  SECTION("fully connected entries must name their neuron model") {
    std::istringstream is("FC-2hidden-16\n");
    REQUIRE_THROWS_MATCHES(cmdnn::parse_grid_config(is), std::invalid_argument,
                           Catch::Matchers::MessageMatches(ContainsSubstring("line 1")));
  }
  SECTION("unknown flags are rejected with the line number") {
    std::istringstream is("\nFC-2hidden-16 neuron=maxout turbo=yes\n");
    REQUIRE_THROWS_MATCHES(cmdnn::parse_grid_config(is), std::invalid_argument,
                           Catch::Matchers::MessageMatches(ContainsSubstring("line 2")));
  }
  SECTION("dropout values outside (0,1] are rejected") {
    std::istringstream is("FC-2hidden-16 neuron=maxout dropout=1.5\n");
    REQUIRE_THROWS_AS(cmdnn::parse_grid_config(is), std::invalid_argument);
  }
  SECTION("neuron mismatches on conv structures are rejected") {
    std::istringstream is("2D-CMNN C4 K3 S2 F16 neuron=relu\n");
    REQUIRE_THROWS_AS(cmdnn::parse_grid_config(is), std::invalid_argument);
  }
  SECTION("an empty file yields no entries") {
    std::istringstream is("# nothing here\n\n");
    REQUIRE(cmdnn::parse_grid_config(is).empty());
  }
}

TEST_CASE("run_experiment") {
  cmdnn::FrameDataset ds = tiny_dataset();
  cmdnn::RunConfig rc = tiny_run_config();
  StructureSpec spec = cmdnn::parse_structure_spec("FC-1hidden-8");
  spec.neuron = NeuronModel::kMaxout;

  SECTION("the result row captures the run and the same seed reproduces it") {
    cmdnn::ExperimentRun a = cmdnn::run_experiment(spec, ds, rc, 3);
    cmdnn::ExperimentRun b = cmdnn::run_experiment(spec, ds, rc, 3);
    REQUIRE(a.result.structure == "FC-1hidden-8");
    REQUIRE(a.result.neuron == std::string("Maxout"));
    REQUIRE(a.result.share == "-");
    REQUIRE(a.result.seed == 3);
    REQUIRE(a.result.acc >= 0.0);
    REQUIRE(a.result.acc <= 100.0);
    REQUIRE(a.result.epochs <= rc.train.max_epochs);
    REQUIRE(a.records.size() == b.records.size());
    REQUIRE(std::memcmp(&a.result.acc, &b.result.acc, sizeof(double)) == 0);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      REQUIRE(std::memcmp(&a.records[i].train_loss, &b.records[i].train_loss,
                          sizeof(double)) == 0);
    }
    REQUIRE(cmdnn::serialize_network(a.net) == cmdnn::serialize_network(b.net));
  }
  SECTION("a different seed changes the trained weights") {
    cmdnn::ExperimentRun a = cmdnn::run_experiment(spec, ds, rc, 3);
    cmdnn::ExperimentRun c = cmdnn::run_experiment(spec, ds, rc, 4);
    REQUIRE(cmdnn::serialize_network(a.net) != cmdnn::serialize_network(c.net));
  }
  SECTION("dataset dimensions must match the context and filter counts") {
    cmdnn::RunConfig wrong = rc;
    wrong.context_width = 5;
    REQUIRE_THROWS_AS(cmdnn::run_experiment(spec, ds, wrong, 0), std::invalid_argument);
  }
  SECTION("a pretrained structure runs the autoencoder stage first") {
    StructureSpec pre = cmdnn::parse_structure_spec("Pre-trained_FC 8-8");
    std::ostringstream log;
    cmdnn::ExperimentRun run = cmdnn::run_experiment(pre, ds, rc, 0, &log);
    REQUIRE(log.str().find("reconstruction mse") != std::string::npos);
    REQUIRE(run.result.neuron == std::string("Sigmoid"));
  }
}

TEST_CASE("result CSV rows") {
  cmdnn::ExperimentResult r;
  r.structure = "FC-1hidden-8";
  r.neuron = "Maxout";
  r.share = "-";
  r.seed = 2;
  r.acc = 51.25;
  r.epochs = 4;
  r.seconds = 1.5;
  std::ostringstream os;
  cmdnn::write_result_row(os, r);
  REQUIRE(os.str() == "FC-1hidden-8,Maxout,-,-,2,51.25,4,1.5\n");

  SECTION("dropout keep probability is recorded") {
    r.dropout_keep = 0.5;
    std::ostringstream os2;
    cmdnn::write_result_row(os2, r);
    REQUIRE(os2.str().find(",0.5,") != std::string::npos);
  }
  SECTION("failures are marked with placeholders") {
    r.failed = true;
    std::ostringstream os3;
    cmdnn::write_result_row(os3, r);
    REQUIRE(os3.str().find("FAILED,-,-") != std::string::npos);
  }
}

TEST_CASE("table rendering aggregates seeds by median and range") {
  cmdnn::GridOutcome outcome;
  outcome.entries.resize(1);
  outcome.per_entry.resize(1);
  for (int i = 0; i < 5; ++i) {
    cmdnn::ExperimentResult r;
    r.structure = "FC-2hidden-16";
    r.neuron = "Maxout";
    r.share = "-";
    r.seed = static_cast<std::uint64_t>(i);
    r.acc = 50.0 + i;  // accuracies 50..54: median 52, range 4
    r.epochs = 3;
    r.seconds = 1.0;
    outcome.per_entry[0].push_back(r);
    outcome.curves.emplace_back();
  }
  std::string table = cmdnn::render_table(outcome);
  REQUIRE_THAT(table, ContainsSubstring("Structure"));
  REQUIRE_THAT(table, ContainsSubstring("FC-2hidden-16"));
  REQUIRE_THAT(table, ContainsSubstring("52.00"));
  REQUIRE_THAT(table, ContainsSubstring("4.00"));
  REQUIRE_THAT(table, ContainsSubstring("5"));  // seed count column

  SECTION("a failed seed is excluded from the aggregate but flagged") {
    outcome.per_entry[0][4].failed = true;
    outcome.all_ok = false;
    std::string flagged = cmdnn::render_table(outcome);
    REQUIRE_THAT(flagged, ContainsSubstring("[some seeds FAILED]"));
    REQUIRE_THAT(flagged, ContainsSubstring("51.50"));  // median of 50..53
  }
  SECTION("an entry with no surviving seeds renders as failed") {
    for (auto& r : outcome.per_entry[0]) r.failed = true;
    std::string failed = cmdnn::render_table(outcome);
    REQUIRE_THAT(failed, ContainsSubstring("FAILED"));
  }
}

TEST_CASE("run_grid") {
  cmdnn::FrameDataset ds = tiny_dataset(2);
  cmdnn::RunConfig rc = tiny_run_config();
  const std::string out_dir =
      (std::filesystem::temp_directory_path() / "cmdnn_grid_test").string();
  std::filesystem::remove_all(out_dir);

  SECTION("an empty grid is refused") {
    REQUIRE_THROWS_AS(cmdnn::run_grid({}, ds, rc, out_dir), std::invalid_argument);
  }

  SECTION("results, curves, and the table land on disk after every run") {
    std::istringstream config(
        "FC-1hidden-8 neuron=maxout seeds=2\n"
        "2D-CMNN C2 K9 S2 F8\n");  // kernel 9 cannot fit the 3-frame context
    std::vector<cmdnn::GridEntry> entries = cmdnn::parse_grid_config(config);
    cmdnn::GridOutcome outcome = cmdnn::run_grid(entries, ds, rc, out_dir);

    REQUIRE_FALSE(outcome.all_ok);
    REQUIRE(outcome.per_entry.size() == 2);
    REQUIRE(outcome.per_entry[0].size() == 2);
    REQUIRE_FALSE(outcome.per_entry[0][0].failed);
    REQUIRE(outcome.per_entry[1][0].failed);
    REQUIRE_FALSE(outcome.per_entry[1][0].error.empty());
    REQUIRE(outcome.curves.size() == 3);

    std::ifstream results(out_dir + "/results.csv");
    REQUIRE(results.good());
    std::string line;
    REQUIRE(std::getline(results, line));
    REQUIRE(line == cmdnn::results_csv_header());
    std::size_t rows = 0, failed_rows = 0;
    while (std::getline(results, line)) {
      ++rows;
      if (line.find("FAILED") != std::string::npos) ++failed_rows;
    }
    REQUIRE(rows == 3);
    REQUIRE(failed_rows == 1);

    std::ifstream curves(out_dir + "/curves.csv");
    REQUIRE(curves.good());
    REQUIRE(std::getline(curves, line));
    REQUIRE(line == "structure,neuron,share,dropout,seed,epoch,loss,acc,lr,seconds");
    std::size_t curve_rows = 0;
    while (std::getline(curves, line)) ++curve_rows;
    REQUIRE(curve_rows == outcome.curves[0].size() + outcome.curves[1].size());

    std::ifstream table(out_dir + "/table.txt");
    REQUIRE(table.good());
    std::stringstream table_text;
    table_text << table.rdbuf();
    REQUIRE_THAT(table_text.str(), ContainsSubstring("FC-1hidden-8"));
    REQUIRE_THAT(table_text.str(), ContainsSubstring("2D-CMNN C2 K9 S2 F8"));
    REQUIRE_THAT(table_text.str(), ContainsSubstring("FAILED"));

    std::filesystem::remove_all(out_dir);
  }

  SECTION("per-seed rows carry identical metadata but their own seed") {
    std::istringstream config("FC-1hidden-8 neuron=relu seeds=2\n");
    cmdnn::GridOutcome outcome =
        cmdnn::run_grid(cmdnn::parse_grid_config(config), ds, rc, out_dir);
    REQUIRE(outcome.all_ok);
    REQUIRE(outcome.per_entry[0][0].seed == 0);
    REQUIRE(outcome.per_entry[0][1].seed == 1);
    REQUIRE(outcome.per_entry[0][0].neuron == std::string("ReLU"));
    std::filesystem::remove_all(out_dir);
  }
}
