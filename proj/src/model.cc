// nrt/src/model.cc

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

#include "nrt/model.h"

namespace nrt {

ModelConfig ModelConfig::LargePreset() {
  ModelConfig c;
  c.encoder = EmformerConfig::LargePreset();
  c.predictor = PredictorConfig::LargePreset();
  c.joiner = JoinerConfig::LargePreset();
  return c;
}

void ModelConfig::Validate() const {
  encoder.Validate();
  predictor.Validate();
  joiner.Validate();
}

ModelParams InitModel(const ModelConfig &cfg, std::uint64_t seed) {
  cfg.Validate();
  ModelParams params;
  RngStream root(seed);
  RngStream enc = root.Split(1), pred = root.Split(2), join = root.Split(3);
  InitEncoderParams(params, cfg.encoder, enc);
  InitPredictorParams(params, cfg.predictor, pred);
  InitJoinerParams(params, cfg.joiner, cfg.encoder.output_dim, cfg.predictor, join);
  return params;
}

Tensor ModelLogProbs(const Example &ex, const ModelParams &params, const ModelConfig &cfg,
                     Mode mode, const ForwardNoise &noise) {
  Tensor enc = EncoderForward(ex.features, cfg.encoder, params, mode, noise.dropout);
  Tensor pred = PredictorForward(ex.labels, params, cfg.predictor, mode, noise.dropout);
  return LogSoftmax(JoinerForward(enc, pred, params, noise.logit_std, mode, noise.logits));
}

Tensor UtteranceLoss(const Example &ex, const ModelParams &params, const ModelConfig &cfg,
                     Mode mode, const ForwardNoise &noise, const LossOptions &loss) {
  Tensor lp = ModelLogProbs(ex, params, cfg, mode, noise);
  if (loss.restrict_alignment && ex.label_frames.size() == ex.labels.size()) {
    auto band = AlignmentBand::FromReference(ex.label_frames, ex.features.rows(),
                                             loss.left_buffer, loss.right_buffer);
    return RestrictedTransducerLoss(lp, ex.labels, band);
  }
  return TransducerLoss(lp, ex.labels);
}

double MeanLoss(const std::vector<Example> &examples, const ModelParams &params,
                const ModelConfig &cfg, const LossOptions &loss) {
  if (examples.empty()) return 0.0;
  Tape::NoGrad no_grad;
  double total = 0.0;
  for (const auto &ex : examples) total += UtteranceLoss(ex, params, cfg, Mode::kEval, {}, loss).item();
  return total / static_cast<double>(examples.size());
}

namespace {

struct DecodeState {
  PredictorState lstm;
  Tensor output;
};

}  // namespace

std::vector<int> GreedyDecodeUtterance(const Tensor &features, const ModelParams &params,
                                       const ModelConfig &cfg,
                                       std::size_t max_symbols_per_frame) {
  Tape::NoGrad no_grad;
  Tensor enc = EncoderForward(features, cfg.encoder, params, Mode::kEval, nullptr);
  auto advance = [&](int token, const DecodeState &s) {
    auto step = PredictorStep(token, s.lstm, params, cfg.predictor, Mode::kEval, nullptr);
    return DecodeState{std::move(step.state), step.output};
  };
  auto joint = [&](std::size_t t, const DecodeState &s) {
    return JoinerForward(SliceRows(enc, t, t + 1), s.output, params, 0.0, Mode::kEval, nullptr)
        .vec();
  };
  DecodeState start = advance(cfg.predictor.blank_id(),
                              DecodeState{InitialPredictorState(cfg.predictor), Tensor()});
  return GreedyDecode(enc.rows(), cfg.predictor.blank_id(), start, advance, joint,
                      max_symbols_per_frame);
}

}  // namespace nrt
