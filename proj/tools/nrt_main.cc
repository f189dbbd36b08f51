// nrt/tools/nrt_main.cc

// Copyright 2026  The noisy-rnnt Authors

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

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "nrt/checkpoint.h"
#include "nrt/config.h"
#include "nrt/data.h"
#include "nrt/features.h"
#include "nrt/harness.h"
#include "nrt/scoring.h"

namespace fs = std::filesystem;

namespace {

nrt::TrainConfig BuildConfig(const std::string &path, const std::vector<std::string> &overrides) {
  if (path.empty()) return nrt::ParseConfig("", overrides);
  return nrt::LoadConfig(path, overrides);
}

void SetOutputDir(const std::string &dir) {
  if (!dir.empty()) setenv(nrt::kOutputDirEnv, dir.c_str(), 1);
}

std::string Join(const std::vector<int> &ids, const nrt::Vocabulary &vocab) {
  std::string out;
  for (int id : ids) out += (out.empty() ? "" : " ") + vocab.Token(id);
  return out;
}

int ExitCode(const nrt::Error &e) { return static_cast<int>(e.category()); }

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Streaming Emformer RNN-T with parameter-noise training and block pruning"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  std::string config_path, resume, out_dir, checkpoint, input, split = "valid", grid = "reduced",
                                                                   table_out;
  std::vector<std::string> overrides, matrices;
  bool acknowledge = false, list_matrices = false;

  auto *train = app.add_subcommand("train", "train a model");
  train->add_option("-c,--config", config_path, "config file (key = value lines)");
  train->add_option("-s,--set", overrides, "override, key=value (repeatable)");
  train->add_option("--resume", resume, "checkpoint to continue from");
  train->add_option("-o,--out", out_dir, "output directory");

  auto *evaluate = app.add_subcommand("evaluate", "score a checkpoint on a data split");
  evaluate->add_option("--checkpoint", checkpoint)->required();
  evaluate->add_option("--split", split, "train|valid")->check(CLI::IsMember({"train", "valid"}));
  evaluate->add_option("-s,--set", overrides, "data overrides, key=value (repeatable)");

  auto *decode = app.add_subcommand("decode", "greedy-decode one wav or feature file");
  decode->add_option("--checkpoint", checkpoint)->required();
  decode->add_option("--input", input, ".wav or .feat file")->required();

  auto *spectrum = app.add_subcommand("spectrum", "normalised singular values of weight matrices");
  spectrum->add_option("--checkpoint", checkpoint)->required();
  spectrum->add_option("--matrix", matrices, "parameter name (repeatable)");
  spectrum->add_flag("--list", list_matrices, "print the weight matrix names");
  spectrum->add_option("-o,--out", table_out, "write the columns here instead of stdout");

  auto *ablate = app.add_subcommand("ablate", "noise / dropout ablation sweep");
  ablate->add_option("-c,--config", config_path, "base config file");
  ablate->add_option("-s,--set", overrides, "override, key=value (repeatable)");
  ablate->add_option("--grid", grid, "reduced|full")->check(CLI::IsMember({"reduced", "full"}));
  ablate->add_flag("--i-understand-the-compute-budget", acknowledge,
                   "required for grids beyond the reduced one");
  ablate->add_option("-o,--out", table_out, "write the table here instead of stdout");

  auto *gen = app.add_subcommand("gen-data", "write the synthetic corpus as feature files");
  gen->add_option("-c,--config", config_path, "config file");
  gen->add_option("-s,--set", overrides, "override, key=value (repeatable)");
  gen->add_option("-o,--out", out_dir, "corpus directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(nrt::ErrorCategory::kConfig);
  }

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    if (*train) {
      SetOutputDir(out_dir);
      nrt::TrainOptions opts;
      opts.resume_from = resume;
      const auto run = nrt::Train(BuildConfig(config_path, overrides), opts);
      std::cout << "best valid loss " << run.best_valid_loss << " at step " << run.best_step
                << "; outputs in " << run.output_dir << "\n";
    } else if (*evaluate) {
      const nrt::LoadedModel m = nrt::LoadModel(checkpoint);
      nrt::TrainConfig cfg = nrt::ParseConfig(nrt::ConfigToText(m.config), overrides);
      const nrt::Dataset data = nrt::LoadDataset(cfg);
      const auto r = nrt::EvaluateCheckpoint(m, data.vocab, split == "train" ? data.train : data.valid);
      std::cout << nlohmann::json{{"split", split}, {"loss", r.loss}, {"ter", r.ter},
                                  {"wer", r.wer}, {"utterances", r.utterances}}
                       .dump()
                << "\n";
    } else if (*decode) {
      const nrt::LoadedModel m = nrt::LoadModel(checkpoint);
      const nrt::Tensor feats = fs::path(input).extension() == ".wav"
                                    ? nrt::ComputeLogMel(nrt::ReadWav(input)).frames
                                    : nrt::ReadFeatures(input).frames;
      const auto ids = nrt::GreedyDecodeUtterance(feats, m.params, m.config.model,
                                                  m.config.train.max_symbols);
      std::cout << Join(ids, m.vocab) << "\n";
    } else if (*spectrum) {
      const nrt::LoadedModel m = nrt::LoadModel(checkpoint);
      std::ofstream file;
      if (!table_out.empty()) {
        file.open(table_out);
        if (!file) throw nrt::DataError("cannot write " + table_out);
      }
      std::ostream &out = table_out.empty() ? std::cout : file;
      if (list_matrices) {
        for (const auto &p : m.params.params())
          if (p.is_matrix()) out << p.name << "\t" << p.value.rows() << "x" << p.value.cols() << "\n";
      }
      out.precision(10);
      for (const auto &name : matrices) {
        out << "# " << name << "\n# index\tlog10_normalized_singular_value\n";
        for (const auto &[i, v] : nrt::SpectrumReport(m.params, name)) out << i << "\t" << v << "\n";
      }
    } else if (*ablate) {
      const nrt::TrainConfig base = BuildConfig(config_path, overrides);
      const auto g = grid == "full" ? nrt::AblationGrid::Full() : nrt::AblationGrid::Reduced();
      std::ofstream file;
      if (!table_out.empty()) {
        file.open(table_out);
        if (!file) throw nrt::DataError("cannot write " + table_out);
      }
      std::ostream &out = table_out.empty() ? std::cout : file;
      out << nrt::AblationHeader() << "\n";
      nrt::RunAblation(base, g, acknowledge,
                       [&](const nrt::AblationRow &row) { out << nrt::AblationLine(row) << std::endl; });
    } else if (*gen) {
      const nrt::TrainConfig cfg = BuildConfig(config_path, overrides);
      if (cfg.data.source != "synthetic") throw nrt::ConfigError("gen-data needs data.source = synthetic");
      const nrt::Dataset data = nrt::LoadDataset(cfg);
      fs::create_directories(out_dir);
      data.vocab.Write((fs::path(out_dir) / "vocab.txt").string());
      nrt::WriteCorpus(out_dir, "train", data.train, data.vocab);
      nrt::WriteCorpus(out_dir, "valid", data.valid, data.vocab);
      std::cout << "wrote " << data.train.size() << " train and " << data.valid.size()
                << " valid utterances to " << out_dir << "\n";
    }
  } catch (const nrt::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCode(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
