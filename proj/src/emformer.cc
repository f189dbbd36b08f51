// nrt/src/emformer.cc

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

#include "nrt/emformer.h"

#include <cmath>

namespace nrt {

namespace {

Tensor InitMatrix(std::size_t in, std::size_t out, RngStream &rng) {
  return Tensor::RandomNormal({in, out}, rng, 1.0 / std::sqrt(static_cast<double>(in)));
}

void AddLayerNorm(ModelParams &p, const std::string &name, std::size_t d) {
  p.Add(name + ".gain", Component::kEncoder, Tensor::Full({d}, 1.0));
  p.Add(name + ".bias", Component::kEncoder, Tensor::Zeros({d}));
}

Tensor ApplyLayerNorm(const Tensor &x, const ModelParams &p, const std::string &name) {
  return LayerNorm(x, p.Get(name + ".gain"), p.Get(name + ".bias"));
}

}  // namespace

EmformerConfig EmformerConfig::LargePreset() {
  EmformerConfig c;
  c.num_layers = 20;
  c.model_dim = 512;
  c.num_heads = 8;
  c.ffn_dim = 2048;
  c.output_dim = 1024;
  c.segment_length = 16;
  return c;
}

void EmformerConfig::Validate() const {
  if (use_memory_bank) throw ConfigError("emformer: memory bank is not supported");
  if (num_heads == 0 || model_dim % num_heads != 0) {
    throw ConfigError("emformer: model_dim " + std::to_string(model_dim) +
                      " not divisible by num_heads " + std::to_string(num_heads));
  }
  if (num_layers == 0 || segment_length == 0 || input_dim == 0 || output_dim == 0 ||
      ffn_dim == 0) {
    throw ConfigError("emformer: dimensions must be positive");
  }
  if (right_context_segments == 0) {
    throw ConfigError("emformer: at least one right-context segment is required");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("emformer: dropout must be in [0, 1)");
}

std::string EncoderLayerPrefix(std::size_t layer) {
  return "encoder.layers." + std::to_string(layer) + ".";
}

void InitEncoderParams(ModelParams &params, const EmformerConfig &cfg, RngStream &rng) {
  cfg.Validate();
  const std::size_t d = cfg.model_dim;
  params.Add("encoder.input.weight", Component::kEncoder, InitMatrix(cfg.input_dim, d, rng));
  params.Add("encoder.input.bias", Component::kEncoder, Tensor::Zeros({d}));
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::string p = EncoderLayerPrefix(l);
    AddLayerNorm(params, p + "ln_input", d);
    for (const char *w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"})
      params.Add(p + w, Component::kEncoder, InitMatrix(d, d, rng));
    AddLayerNorm(params, p + "ln_ffn", d);
    params.Add(p + "ffn.w1", Component::kEncoder, InitMatrix(d, cfg.ffn_dim, rng));
    params.Add(p + "ffn.b1", Component::kEncoder, Tensor::Zeros({cfg.ffn_dim}));
    params.Add(p + "ffn.w2", Component::kEncoder, InitMatrix(cfg.ffn_dim, d, rng));
    params.Add(p + "ffn.b2", Component::kEncoder, Tensor::Zeros({d}));
    AddLayerNorm(params, p + "ln_output", d);
  }
  params.Add("encoder.output.weight", Component::kEncoder, InitMatrix(d, cfg.output_dim, rng));
  params.Add("encoder.output.bias", Component::kEncoder, Tensor::Zeros({cfg.output_dim}));
}

std::size_t EmformerLayerState::cached_frames() const {
  std::size_t n = 0;
  for (const auto &k : keys) n += k.rows();
  return n;
}

Tensor MultiHeadAttention(const Tensor &q, const Tensor &k, const Tensor &v,
                          const Tensor &wo, std::size_t num_heads,
                          std::vector<Tensor> *weights) {
  const std::size_t d = q.cols();
  if (k.cols() != d || v.cols() != d || k.rows() != v.rows()) {
    throw DimensionError("MultiHeadAttention: q " + ShapeToString(q.shape()) + ", k " +
                         ShapeToString(k.shape()) + ", v " + ShapeToString(v.shape()));
  }
  const std::size_t dh = d / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> heads;
  heads.reserve(num_heads);
  for (std::size_t h = 0; h < num_heads; ++h) {
    const std::size_t b = h * dh, e = b + dh;
    Tensor scores = Scale(MatMulNT(SliceCols(q, b, e), SliceCols(k, b, e)), scale);
    Tensor probs = Softmax(scores);
    if (weights) weights->push_back(probs);
    heads.push_back(MatMul(probs, SliceCols(v, b, e)));
  }
  return MatMul(num_heads == 1 ? heads.front() : ConcatCols(heads), wo);
}

EmformerLayerOutput EmformerLayerForward(const Tensor &center, const Tensor &right,
                                         const EmformerLayerState &state,
                                         const ModelParams &params,
                                         const EmformerConfig &cfg,
                                         std::size_t segment_index, Mode mode,
                                         RngStream *rng) {
  if (state.next_segment != segment_index) {
    throw StateError("emformer layer " + std::to_string(state.layer) + ": expected segment " +
                     std::to_string(state.next_segment) + ", got " +
                     std::to_string(segment_index));
  }
  if (center.rows() == 0 || center.rows() > cfg.segment_length ||
      right.rows() != cfg.right_context_frames() || center.cols() != cfg.model_dim ||
      right.cols() != cfg.model_dim) {
    throw DimensionError("emformer layer: segment " + ShapeToString(center.shape()) +
                         " / right context " + ShapeToString(right.shape()) +
                         " do not match the configuration");
  }
  const bool training = mode == Mode::kTrain;
  const std::string p = EncoderLayerPrefix(state.layer);
  const std::size_t c = center.rows();

  Tensor x = ConcatRows({center, right});
  Tensor x_norm = ApplyLayerNorm(x, params, p + "ln_input");

  const Tensor &wk = params.Get(p + "attn.wk");
  const Tensor &wv = params.Get(p + "attn.wv");
  Tensor k_center = MatMul(center, wk);
  Tensor v_center = MatMul(center, wv);
  std::vector<Tensor> key_parts(state.keys.begin(), state.keys.end());
  std::vector<Tensor> value_parts(state.values.begin(), state.values.end());
  key_parts.push_back(k_center);
  key_parts.push_back(MatMul(right, wk));
  value_parts.push_back(v_center);
  value_parts.push_back(MatMul(right, wv));

  Tensor queries = MatMul(x_norm, params.Get(p + "attn.wq"));
  Tensor attn = MultiHeadAttention(queries, ConcatRows(key_parts), ConcatRows(value_parts),
                                   params.Get(p + "attn.wo"), cfg.num_heads);
  Tensor z = Add(Dropout(attn, cfg.dropout, rng, training), x);

  Tensor hidden = Relu(Linear(ApplyLayerNorm(z, params, p + "ln_ffn"), params.Get(p + "ffn.w1"),
                              params.Get(p + "ffn.b1")));
  hidden = Dropout(hidden, cfg.dropout, rng, training);
  Tensor ffn = Linear(hidden, params.Get(p + "ffn.w2"), params.Get(p + "ffn.b2"));
  ffn = Dropout(ffn, cfg.dropout, rng, training);
  Tensor y = ApplyLayerNorm(Add(ffn, z), params, p + "ln_output");

  EmformerLayerOutput out;
  out.center = SliceRows(y, 0, c);
  out.right = SliceRows(y, c, y.rows());
  out.state = state;
  out.state.next_segment = segment_index + 1;
  out.state.keys.push_back(k_center);
  out.state.values.push_back(v_center);
  while (out.state.keys.size() > cfg.left_context_segments) {
    out.state.keys.pop_front();
    out.state.values.pop_front();
  }
  return out;
}

Tensor EncoderForward(const Tensor &features, const EmformerConfig &cfg,
                      const ModelParams &params, Mode mode, RngStream *rng) {
  if (features.dim() != 2 || features.rows() == 0) {
    throw DimensionError("EncoderForward: features must be a non-empty T x D matrix");
  }
  if (features.cols() != cfg.input_dim) {
    throw ConfigError("EncoderForward: feature dim " + std::to_string(features.cols()) +
                      " != configured input_dim " + std::to_string(cfg.input_dim));
  }
  const std::size_t num_frames = features.rows();
  const std::size_t seg = cfg.segment_length;
  const std::size_t rc = cfg.right_context_frames();
  const std::size_t num_segments = (num_frames + seg - 1) / seg;

  Tensor x = Linear(features, params.Get("encoder.input.weight"),
                    params.Get("encoder.input.bias"));

  std::vector<EmformerLayerState> states(cfg.num_layers);
  for (std::size_t l = 0; l < cfg.num_layers; ++l) states[l].layer = l;

  std::vector<Tensor> outputs;
  outputs.reserve(num_segments);
  for (std::size_t i = 0; i < num_segments; ++i) {
    const std::size_t cb = i * seg, ce = std::min(cb + seg, num_frames);
    const std::size_t rb = std::min(ce, num_frames), re = std::min(ce + rc, num_frames);
    Tensor center = SliceRows(x, cb, ce);
    Tensor right;
    if (re - rb == rc) {
      right = SliceRows(x, rb, re);
    } else if (re == rb) {
      right = Tensor::Zeros({rc, cfg.model_dim});
    } else {
      right = ConcatRows({SliceRows(x, rb, re), Tensor::Zeros({rc - (re - rb), cfg.model_dim})});
    }
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
      auto out = EmformerLayerForward(center, right, states[l], params, cfg, i, mode, rng);
      center = out.center;
      right = out.right;
      states[l] = std::move(out.state);
    }
    outputs.push_back(center);
  }
  Tensor y = outputs.size() == 1 ? outputs.front() : ConcatRows(outputs);
  return Linear(y, params.Get("encoder.output.weight"), params.Get("encoder.output.bias"));
}

}  // namespace nrt
