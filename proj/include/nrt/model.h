// nrt/model.h

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

#ifndef NRT_MODEL_H_
#define NRT_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "nrt/emformer.h"
#include "nrt/params.h"
#include "nrt/predictor_joiner.h"
#include "nrt/rng.h"
#include "nrt/tensor.h"
#include "nrt/transducer.h"

namespace nrt {

struct ModelConfig {
  EmformerConfig encoder;
  PredictorConfig predictor;
  JoinerConfig joiner;

  static ModelConfig LargePreset();
  void Validate() const;
};

// One utterance: T x feature_dim frames, label ids, and (for synthetic data)
// the frame at which each label starts.
struct Example {
  std::string id;
  Tensor features;
  std::vector<int> labels;
  std::vector<std::size_t> label_frames;
};

struct LossOptions {
  bool restrict_alignment = false;
  std::size_t left_buffer = 0;
  std::size_t right_buffer = 8;
};

ModelParams InitModel(const ModelConfig &cfg, std::uint64_t seed);

// Randomness used by one forward pass in train mode.
struct ForwardNoise {
  RngStream *dropout = nullptr;
  RngStream *logits = nullptr;
  double logit_std = 0.0;
};

// Joiner log-probabilities, T x (U+1) x (V+1).
Tensor ModelLogProbs(const Example &ex, const ModelParams &params, const ModelConfig &cfg,
                     Mode mode, const ForwardNoise &noise = {});

// -log p(labels | features); alignment-restricted when requested and the
// example carries reference frames.
Tensor UtteranceLoss(const Example &ex, const ModelParams &params, const ModelConfig &cfg,
                     Mode mode, const ForwardNoise &noise = {}, const LossOptions &loss = {});

// Mean eval-mode loss over `examples`.
double MeanLoss(const std::vector<Example> &examples, const ModelParams &params,
                const ModelConfig &cfg, const LossOptions &loss = {});

std::vector<int> GreedyDecodeUtterance(const Tensor &features, const ModelParams &params,
                                       const ModelConfig &cfg,
                                       std::size_t max_symbols_per_frame = 5);

}  // namespace nrt

#endif  // NRT_MODEL_H_
