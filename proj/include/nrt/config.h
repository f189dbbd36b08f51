// nrt/config.h

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

#ifndef NRT_CONFIG_H_
#define NRT_CONFIG_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nrt/data.h"
#include "nrt/features.h"
#include "nrt/model.h"
#include "nrt/noise.h"
#include "nrt/optimizer.h"
#include "nrt/pruning.h"

namespace nrt {

struct DataConfig {
  std::string source = "synthetic";  // synthetic | manifest
  // manifest source: <dir>/train.tsv, <dir>/valid.tsv, <dir>/vocab.txt
  std::string dir;
  SyntheticTask task;
  std::size_t train_size = 800;
  std::size_t valid_size = 64;
  std::uint64_t seed = 3;
  // Speed factors applied to wav training audio; 1 keeps the original.
  std::vector<double> speed_perturb = {1.0};
  bool specaugment = false;
  SpecAugmentConfig specaug;
};

struct TrainLoopConfig {
  std::int64_t steps = 200;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;  // model init, data order, dropout
  std::int64_t checkpoint_every = 0;  // periodic checkpoints; 0 disables
  std::size_t max_symbols = 5;  // greedy decode symbols per frame
  std::size_t eval_train_limit = 64;  // train utterances scored per epoch; 0 = all
  std::int64_t eval_every_epochs = 1;
  std::int64_t max_nonfinite_steps = 3;
};

struct TrainConfig {
  std::string preset = "desk";  // desk | large
  ModelConfig model;
  NoiseConfig noise;
  PruneSchedule prune;
  OptimizerConfig optimizer;
  LossOptions loss;
  DataConfig data;
  TrainLoopConfig train;
  std::string output_dir = "runs/default";

  TrainConfig();
  void Validate() const;
};

// Desk-scale model sized for the synthetic copy task.
ModelConfig DeskModel();

// "key = value" lines, '#' comments. Overrides ("key=value") apply after the
// file. A model.preset entry is applied before any other key regardless of
// position. Unknown keys and malformed values are ConfigErrors.
TrainConfig ParseConfig(const std::string &text,
                        const std::vector<std::string> &overrides = {});
TrainConfig LoadConfig(const std::string &path, const std::vector<std::string> &overrides = {});

// Every key in a fixed order; ParseConfig(ConfigToText(c)) reproduces c.
std::string ConfigToText(const TrainConfig &cfg);
std::vector<std::string> ConfigKeys();

// FNV-1a over the canonical text minus output.dir.
std::uint64_t ConfigDigest(const TrainConfig &cfg);
std::uint64_t Fnv1a(const std::string &bytes);

// Value of output.dir after the NRT_OUTPUT_DIR environment override.
std::string ResolveOutputDir(const TrainConfig &cfg);
inline constexpr const char *kOutputDirEnv = "NRT_OUTPUT_DIR";

}  // namespace nrt

#endif  // NRT_CONFIG_H_
