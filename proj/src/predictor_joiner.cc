// nrt/src/predictor_joiner.cc

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

#include "nrt/predictor_joiner.h"

#include <cmath>
#include <string>

namespace nrt {

namespace {

Tensor InitMatrix(std::size_t in, std::size_t out, RngStream &rng) {
  return Tensor::RandomNormal({in, out}, rng, 1.0 / std::sqrt(static_cast<double>(in)));
}

std::string LstmPrefix(std::size_t layer) {
  return "predictor.lstm." + std::to_string(layer) + ".";
}

}  // namespace

PredictorConfig PredictorConfig::LargePreset() {
  PredictorConfig c;
  c.vocab_size = 4096;
  c.embed_dim = 512;
  c.lstm_layers = 3;
  c.hidden_dim = 512;
  c.output_dim = 1024;
  return c;
}

void PredictorConfig::Validate() const {
  if (vocab_size == 0) throw ConfigError("predictor: vocab_size must be at least 1");
  if (embed_dim == 0 || lstm_layers == 0 || hidden_dim == 0 || output_dim == 0) {
    throw ConfigError("predictor: dimensions must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("predictor: dropout must be in [0, 1)");
}

JoinerConfig JoinerConfig::LargePreset() { return JoinerConfig{1024}; }

void JoinerConfig::Validate() const {
  if (joint_dim == 0) throw ConfigError("joiner: joint_dim must be positive");
}

void InitPredictorParams(ModelParams &params, const PredictorConfig &cfg, RngStream &rng) {
  cfg.Validate();
  const std::size_t h = cfg.hidden_dim;
  params.Add("predictor.embedding", Component::kPredictor,
             Tensor::RandomNormal({cfg.vocab_size + 1, cfg.embed_dim}, rng, 1.0));
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    const std::string p = LstmPrefix(l);
    const std::size_t in = l == 0 ? cfg.embed_dim : h;
    params.Add(p + "w_ih", Component::kPredictor, InitMatrix(in, 4 * h, rng));
    params.Add(p + "w_hh", Component::kPredictor, InitMatrix(h, 4 * h, rng));
    params.Add(p + "ln_gates.gain", Component::kPredictor, Tensor::Full({4 * h}, 1.0));
    params.Add(p + "ln_gates.bias", Component::kPredictor, Tensor::Zeros({4 * h}));
    params.Add(p + "ln_cell.gain", Component::kPredictor, Tensor::Full({h}, 1.0));
    params.Add(p + "ln_cell.bias", Component::kPredictor, Tensor::Zeros({h}));
  }
  params.Add("predictor.output.weight", Component::kPredictor, InitMatrix(h, cfg.output_dim, rng));
  params.Add("predictor.output.bias", Component::kPredictor, Tensor::Zeros({cfg.output_dim}));
}

void InitJoinerParams(ModelParams &params, const JoinerConfig &cfg, std::size_t encoder_dim,
                      const PredictorConfig &pred, RngStream &rng) {
  cfg.Validate();
  params.Add("joiner.enc.weight", Component::kJoiner, InitMatrix(encoder_dim, cfg.joint_dim, rng));
  params.Add("joiner.pred.weight", Component::kJoiner,
             InitMatrix(pred.output_dim, cfg.joint_dim, rng));
  params.Add("joiner.bias", Component::kJoiner, Tensor::Zeros({cfg.joint_dim}));
  params.Add("joiner.output.weight", Component::kJoiner,
             InitMatrix(cfg.joint_dim, pred.vocab_size + 1, rng));
  params.Add("joiner.output.bias", Component::kJoiner, Tensor::Zeros({pred.vocab_size + 1}));
}

PredictorState InitialPredictorState(const PredictorConfig &cfg) {
  PredictorState s;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    s.h.push_back(Tensor::Zeros({1, cfg.hidden_dim}));
    s.c.push_back(Tensor::Zeros({1, cfg.hidden_dim}));
  }
  return s;
}

void CheckToken(int token, const PredictorConfig &cfg) {
  if (token < 0 || token >= static_cast<int>(cfg.vocab_size)) {
    throw DataError("token id " + std::to_string(token) + " outside vocabulary of " +
                    std::to_string(cfg.vocab_size));
  }
}

PredictorStepOutput PredictorStep(int token, const PredictorState &state,
                                  const ModelParams &params, const PredictorConfig &cfg,
                                  Mode mode, RngStream *rng) {
  if (token != cfg.blank_id()) CheckToken(token, cfg);
  if (state.h.size() != cfg.lstm_layers || state.c.size() != cfg.lstm_layers) {
    throw StateError("predictor state has " + std::to_string(state.h.size()) +
                     " layers, expected " + std::to_string(cfg.lstm_layers));
  }
  const bool training = mode == Mode::kTrain;
  const std::size_t h = cfg.hidden_dim;
  const int id = token;
  Tensor x = GatherRows(params.Get("predictor.embedding"), std::span<const int>(&id, 1));
  PredictorStepOutput out;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    const std::string p = LstmPrefix(l);
    Tensor gates = Add(MatMul(x, params.Get(p + "w_ih")), MatMul(state.h[l], params.Get(p + "w_hh")));
    gates = LayerNorm(gates, params.Get(p + "ln_gates.gain"), params.Get(p + "ln_gates.bias"));
    Tensor i = Sigmoid(SliceCols(gates, 0, h));
    Tensor f = Sigmoid(SliceCols(gates, h, 2 * h));
    Tensor g = Tanh(SliceCols(gates, 2 * h, 3 * h));
    Tensor o = Sigmoid(SliceCols(gates, 3 * h, 4 * h));
    Tensor c = LayerNorm(Add(Mul(f, state.c[l]), Mul(i, g)), params.Get(p + "ln_cell.gain"),
                         params.Get(p + "ln_cell.bias"));
    Tensor hn = Mul(o, Tanh(c));
    out.state.h.push_back(hn);
    out.state.c.push_back(c);
    x = Dropout(hn, cfg.dropout, rng, training);
  }
  out.output = Linear(x, params.Get("predictor.output.weight"), params.Get("predictor.output.bias"));
  return out;
}

Tensor PredictorForward(std::span<const int> labels, const ModelParams &params,
                        const PredictorConfig &cfg, Mode mode, RngStream *rng) {
  for (int t : labels) CheckToken(t, cfg);
  PredictorState state = InitialPredictorState(cfg);
  std::vector<Tensor> rows;
  rows.reserve(labels.size() + 1);
  int token = cfg.blank_id();
  for (std::size_t u = 0; u <= labels.size(); ++u) {
    auto step = PredictorStep(token, state, params, cfg, mode, rng);
    rows.push_back(step.output);
    state = std::move(step.state);
    if (u < labels.size()) token = labels[u];
  }
  return rows.size() == 1 ? rows.front() : ConcatRows(rows);
}

Tensor JoinerForward(const Tensor &enc, const Tensor &pred, const ModelParams &params,
                     double logit_noise_std, Mode mode, RngStream *rng) {
  if (!(logit_noise_std >= 0.0)) throw ConfigError("joiner: logit noise std must be >= 0");
  const Tensor &we = params.Get("joiner.enc.weight");
  const Tensor &wp = params.Get("joiner.pred.weight");
  if (enc.dim() != 2 || pred.dim() != 2 || enc.cols() != we.rows() || pred.cols() != wp.rows()) {
    throw ConfigError("joiner: encoder " + ShapeToString(enc.shape()) + " / predictor " +
                      ShapeToString(pred.shape()) + " do not match joiner weights " +
                      ShapeToString(we.shape()) + " / " + ShapeToString(wp.shape()));
  }
  const std::size_t T = enc.rows(), U1 = pred.rows();
  Tensor hidden = Tanh(OuterAddRows(Linear(enc, we, params.Get("joiner.bias")), MatMul(pred, wp)));
  Tensor logits = Linear(hidden, params.Get("joiner.output.weight"),
                         params.Get("joiner.output.bias"));
  if (mode == Mode::kTrain && logit_noise_std > 0.0) {
    if (!rng) throw ConfigError("joiner: logit noise requires an RNG stream");
    Tensor noise = Tensor::RandomNormal(logits.shape(), *rng, logit_noise_std);
    logits = Add(logits, noise);
  }
  return Reshape(logits, {T, U1, logits.cols()});
}

}  // namespace nrt
