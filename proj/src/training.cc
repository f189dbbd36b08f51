// nrt/src/training.cc

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

#include "nrt/training.h"

#include <cmath>

namespace nrt {

StepResult NoisyStep(ModelParams &params, const NoiseConfig &noise, Optimizer &opt,
                     const MaskSet *masks, RngStream &noise_rng, std::size_t batch_size,
                     const ItemLoss &item_loss, const ItemName &item_name) {
  if (batch_size == 0) throw DataError("training step on an empty batch");
  StepResult result;
  params.ZeroGrad();
  PerturbationRecord record = PerturbParams(params, noise, noise_rng, masks);
  result.perturbed_tensors = record.names.size();
  const double weight = 1.0 / static_cast<double>(batch_size);
  try {
    for (std::size_t b = 0; b < batch_size; ++b) {
      Tape tape;
      Tape::Scope scope(tape);
      Tensor loss = item_loss(b);
      const double v = loss.item();
      if (!std::isfinite(v)) {
        throw NumericError("non-finite loss " + std::to_string(v) + " for utterance " +
                           item_name(b));
      }
      result.loss += weight * v;
      tape.Backward(loss, weight);
    }
  } catch (...) {
    RestoreParams(params, record);
    params.ZeroGrad();
    throw;
  }
  RestoreParams(params, record);

  if (noise.lambda > 0.0) {
    Tape tape;
    Tape::Scope scope(tape);
    Tensor l2 = L2Penalty(params, noise.lambda, AllComponents(), noise.matrices_only);
    result.l2 = l2.item();
    tape.Backward(l2);
  }
  if (masks) masks->MaskGradients(params);
  result.grad_norm = opt.Step(params);
  if (masks) masks->Apply(params);
  return result;
}

StepResult NoisyTrainingStep(const std::vector<const Example *> &batch, ModelParams &params,
                             const ModelConfig &model, const NoiseConfig &noise,
                             const LossOptions &loss, Optimizer &opt, const MaskSet *masks,
                             const RngStream &step_rng, const RngStream *noise_stream) {
  RngStream noise_rng = noise_stream ? *noise_stream : step_rng.Split(1);
  auto item = [&](std::size_t b) {
    RngStream dropout = step_rng.Split(100 + 2 * b);
    RngStream logits = step_rng.Split(101 + 2 * b);
    ForwardNoise fn{&dropout, &logits, noise.logit_std};
    return UtteranceLoss(*batch[b], params, model, Mode::kTrain, fn, loss);
  };
  auto name = [&](std::size_t b) { return batch[b]->id; };
  return NoisyStep(params, noise, opt, masks, noise_rng, batch.size(), item, name);
}

}  // namespace nrt
