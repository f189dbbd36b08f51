// nrt/harness.h

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

#ifndef NRT_HARNESS_H_
#define NRT_HARNESS_H_

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nrt/config.h"
#include "nrt/data.h"
#include "nrt/params.h"

namespace nrt {

struct Dataset {
  Vocabulary vocab;
  std::vector<Example> train;
  std::vector<Example> valid;
};

// Synthetic corpora are generated from data.seed (train and valid use
// separate streams); manifest corpora are read from data.dir.
Dataset LoadDataset(const TrainConfig &cfg);

struct EvalResult {
  double loss = 0.0;  // mean per-utterance negative log-likelihood
  double ter = 0.0;
  double wer = 0.0;
  std::size_t utterances = 0;
};

// Eval-mode loss over the full lattice plus greedy-decode error rates.
// `limit` > 0 scores only the first `limit` examples.
EvalResult Evaluate(const std::vector<Example> &examples, const ModelParams &params,
                    const ModelConfig &model, const Vocabulary &vocab, std::size_t max_symbols,
                    std::size_t limit = 0);

struct MetricRecord {
  std::int64_t step = 0;
  std::int64_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double ter = 0.0;
  double wer = 0.0;
  double sparsity = 0.0;
  double alpha = 0.0;

  nlohmann::json ToJson() const;
  static MetricRecord FromJson(const nlohmann::json &j);
  bool operator==(const MetricRecord &o) const = default;
};

struct TrainOptions {
  // Checkpoint to continue from; its config digest must match.
  std::string resume_from;
  // Return after this many completed steps (checkpoints written as usual).
  std::int64_t stop_after = -1;
  // Skip every file write (ablation sweeps, tests).
  bool write_files = true;
  // Observer for each finished step: (step, mean batch loss).
  std::function<void(std::int64_t, double)> on_step;
  // Observer for the utterance ids of each step's batch, before the update.
  std::function<void(std::int64_t, const std::vector<std::string> &)> on_batch;
};

struct RunResult {
  std::vector<MetricRecord> metrics;
  ModelParams best_params;  // lowest validation loss seen at an epoch end
  ModelParams final_params;
  double best_valid_loss = 0.0;
  std::int64_t best_step = 0;
  std::int64_t steps_completed = 0;
  std::int64_t skipped_steps = 0;
  std::string output_dir;
  Vocabulary vocab;
};

// Runs the configured training job. Files under the output directory:
//   config.txt, metrics.jsonl, prune.jsonl, loss_train.tsv, loss_valid.tsv,
//   last.ckpt, best.ckpt, final.ckpt (== best), step-<n>.ckpt when periodic.
// A run of max_nonfinite_steps consecutive non-finite steps writes
// diagnostic.json and rethrows the NumericError.
RunResult Train(const TrainConfig &cfg, const TrainOptions &opts = {});

// Rebuilds the model a checkpoint was written for and loads its weights.
struct LoadedModel {
  TrainConfig config;
  ModelParams params;
  Vocabulary vocab;
  nlohmann::json state;
};
LoadedModel LoadModel(const std::string &checkpoint_path);

// Scores `examples` with a loaded model; a dataset vocabulary that differs
// from the checkpoint's is a CheckpointError.
EvalResult EvaluateCheckpoint(const LoadedModel &model, const Vocabulary &data_vocab,
                              const std::vector<Example> &examples);

// (index, log10 normalised singular value) for one weight matrix; values
// below kSpectrumFloor are clamped there. Unknown names and non-matrices are
// ConfigErrors.
inline constexpr double kSpectrumFloor = 1e-16;
std::vector<std::pair<std::size_t, double>> SpectrumReport(const ModelParams &params,
                                                           const std::string &name);

struct AblationGrid {
  std::vector<double> alphas;
  std::vector<ComponentSet> targets;
  std::vector<double> logit_stds;
  std::vector<double> dropouts;

  static AblationGrid Full();
  static AblationGrid Reduced();
  std::size_t size() const {
    return alphas.size() * targets.size() * logit_stds.size() * dropouts.size();
  }
};

struct AblationRow {
  double alpha = 0.0;
  ComponentSet targets;
  double logit_std = 0.0;
  double dropout = 0.0;
  double best_valid_loss = 0.0;
  EvalResult valid;  // scored with the best-validation weights
};

// Grids larger than the reduced one refuse to run (ConfigError) unless
// `budget_acknowledged` is set. Rows arrive through `on_row` as they finish.
std::vector<AblationRow> RunAblation(const TrainConfig &base, const AblationGrid &grid,
                                     bool budget_acknowledged,
                                     const std::function<void(const AblationRow &)> &on_row = {});
std::string AblationHeader();
std::string AblationLine(const AblationRow &row);

}  // namespace nrt

#endif  // NRT_HARNESS_H_
