// nrt/training.h

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

#ifndef NRT_TRAINING_H_
#define NRT_TRAINING_H_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nrt/model.h"
#include "nrt/noise.h"
#include "nrt/optimizer.h"
#include "nrt/pruning.h"
#include "nrt/rng.h"

namespace nrt {

struct StepResult {
  double loss = 0.0;  // mean data loss over the batch, at the perturbed weights
  double l2 = 0.0;    // penalty at the clean weights
  double grad_norm = 0.0;
  std::size_t perturbed_tensors = 0;
};

// Builds the scalar loss of batch item b; called with a tape active.
using ItemLoss = std::function<Tensor(std::size_t b)>;
using ItemName = std::function<std::string(std::size_t b)>;

// One parameter-noise training step:
//   perturb targeted weights with fresh column noise (masked when pruning),
//   accumulate d(mean item loss)/dw at the perturbed point,
//   restore the clean weights bit-exactly,
//   add the L2 gradient lambda * w at the clean point,
//   drop masked gradients, update, re-apply masks.
// A non-finite item loss restores the weights and throws NumericError naming
// the item.
StepResult NoisyStep(ModelParams &params, const NoiseConfig &noise, Optimizer &opt,
                     const MaskSet *masks, RngStream &noise_rng, std::size_t batch_size,
                     const ItemLoss &item_loss, const ItemName &item_name);

// The RNN-T instance: per-utterance dropout and logit-noise streams are split
// from `step_rng`. Weight noise comes from `noise_rng` when given, otherwise
// from step_rng.Split(1).
StepResult NoisyTrainingStep(const std::vector<const Example *> &batch, ModelParams &params,
                             const ModelConfig &model, const NoiseConfig &noise,
                             const LossOptions &loss, Optimizer &opt, const MaskSet *masks,
                             const RngStream &step_rng, const RngStream *noise_rng = nullptr);

}  // namespace nrt

#endif  // NRT_TRAINING_H_
