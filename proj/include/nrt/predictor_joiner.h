// nrt/predictor_joiner.h

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

#ifndef NRT_PREDICTOR_JOINER_H_
#define NRT_PREDICTOR_JOINER_H_

#include <cstddef>
#include <span>
#include <vector>

#include "nrt/emformer.h"
#include "nrt/params.h"
#include "nrt/rng.h"
#include "nrt/tensor.h"

namespace nrt {

struct PredictorConfig {
  std::size_t vocab_size = 29;  // non-blank tokens; blank id == vocab_size
  std::size_t embed_dim = 32;
  std::size_t lstm_layers = 1;
  std::size_t hidden_dim = 64;
  std::size_t output_dim = 64;
  double dropout = 0.1;

  static PredictorConfig LargePreset();
  int blank_id() const { return static_cast<int>(vocab_size); }
  void Validate() const;
};

struct JoinerConfig {
  std::size_t joint_dim = 64;

  static JoinerConfig LargePreset();
  void Validate() const;
};

void InitPredictorParams(ModelParams &params, const PredictorConfig &cfg, RngStream &rng);
void InitJoinerParams(ModelParams &params, const JoinerConfig &cfg, std::size_t encoder_dim,
                      const PredictorConfig &pred, RngStream &rng);

// Recurrent state of the LSTM stack, one 1 x hidden row per layer.
struct PredictorState {
  std::vector<Tensor> h;
  std::vector<Tensor> c;
};

PredictorState InitialPredictorState(const PredictorConfig &cfg);

struct PredictorStepOutput {
  Tensor output;  // 1 x output_dim
  PredictorState state;
};

// Feeds one token (blank id doubles as start-of-sequence) through the
// embedding, layer-normalized LSTM stack and output projection.
PredictorStepOutput PredictorStep(int token, const PredictorState &state,
                                  const ModelParams &params, const PredictorConfig &cfg,
                                  Mode mode, RngStream *rng);

// (U+1) x output_dim. Row 0 is the start-of-sequence state; row u has seen
// labels[0..u).
Tensor PredictorForward(std::span<const int> labels, const ModelParams &params,
                        const PredictorConfig &cfg, Mode mode, RngStream *rng);

// enc: T x d_enc, pred: (U+1) x d_pred -> T x (U+1) x (V+1) logits,
//   logits[t, u] = W_out tanh(W_e enc_t + W_p pred_u + b) + b_out.
// Gaussian logit noise with the given std is added in train mode only.
Tensor JoinerForward(const Tensor &enc, const Tensor &pred, const ModelParams &params,
                     double logit_noise_std, Mode mode, RngStream *rng);

void CheckToken(int token, const PredictorConfig &cfg);

}  // namespace nrt

#endif  // NRT_PREDICTOR_JOINER_H_
