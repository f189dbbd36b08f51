// nrt/emformer.h

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

#ifndef NRT_EMFORMER_H_
#define NRT_EMFORMER_H_

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "nrt/params.h"
#include "nrt/rng.h"
#include "nrt/tensor.h"

namespace nrt {

enum class Mode { kTrain, kEval };

struct EmformerConfig {
  std::size_t input_dim = 80;
  std::size_t num_layers = 2;
  std::size_t model_dim = 64;
  std::size_t num_heads = 4;
  std::size_t ffn_dim = 256;
  std::size_t output_dim = 64;
  std::size_t segment_length = 4;          // frames per center segment
  std::size_t right_context_segments = 1;  // look-ahead, in segments
  std::size_t left_context_segments = 8;   // cached key/value budget
  double dropout = 0.1;
  // The summary-query ("memory bank") path is not part of this cell; the
  // flag exists so configs can state it and is rejected when set.
  bool use_memory_bank = false;

  // 512 units, 8 heads, 2048 FFN, 20 layers, 160 ms segments.
  static EmformerConfig LargePreset();

  std::size_t right_context_frames() const { return segment_length * right_context_segments; }
  void Validate() const;
};

// Registers encoder.* parameters.
void InitEncoderParams(ModelParams &params, const EmformerConfig &cfg, RngStream &rng);

// Cached left-context keys and values of one layer, one entry per segment.
struct EmformerLayerState {
  std::size_t layer = 0;
  std::size_t next_segment = 0;
  std::deque<Tensor> keys;
  std::deque<Tensor> values;

  std::size_t cached_frames() const;
};

struct EmformerLayerOutput {
  Tensor center;
  Tensor right;
  EmformerLayerState state;
};

// Multi-head scaled dot-product attention with output projection `wo`.
// When `weights` is non-null it receives the per-head attention matrices.
Tensor MultiHeadAttention(const Tensor &q, const Tensor &k, const Tensor &v,
                          const Tensor &wo, std::size_t num_heads,
                          std::vector<Tensor> *weights = nullptr);

// One simplified Emformer cell applied to segment `segment_index`:
//   [C^, R^] = LN([C, R]);  K = [K_L, C Wk, R Wk];  V = [V_L, C Wv, R Wv]
//   Z = Attn([C^, R^] Wq, K, V) + [C, R]
//   X = LN(FFN(LN(Z)) + Z)
// The new state appends C Wk / C Wv to the cache and evicts segments beyond
// the left-context budget.
EmformerLayerOutput EmformerLayerForward(const Tensor &center, const Tensor &right,
                                         const EmformerLayerState &state,
                                         const ModelParams &params,
                                         const EmformerConfig &cfg,
                                         std::size_t segment_index, Mode mode,
                                         RngStream *rng);

// Input projection, streaming Emformer stack, output projection.
// features: T x input_dim  ->  T x output_dim.
Tensor EncoderForward(const Tensor &features, const EmformerConfig &cfg,
                      const ModelParams &params, Mode mode, RngStream *rng);

std::string EncoderLayerPrefix(std::size_t layer);

}  // namespace nrt

#endif  // NRT_EMFORMER_H_
