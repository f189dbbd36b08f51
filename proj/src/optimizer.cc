// nrt/src/optimizer.cc

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

#include "nrt/optimizer.h"

#include <cmath>

namespace nrt {

void OptimizerConfig::Validate() const {
  if (kind != "sgd" && kind != "adam") {
    throw ConfigError("optimizer.kind must be sgd or adam, got '" + kind + "'");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("optimizer.lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("optimizer.momentum must be in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("optimizer betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("optimizer.epsilon must be positive");
  if (!(clip_norm >= 0.0)) throw ConfigError("optimizer.clip_norm must be >= 0");
}

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(std::move(cfg)) { cfg_.Validate(); }

double GlobalGradNorm(const ModelParams &params) {
  double sq = 0.0;
  for (const auto &p : params.params()) {
    if (!p.value.has_grad()) continue;
    for (double g : p.value.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

double Optimizer::Step(ModelParams &params) {
  const double norm = GlobalGradNorm(params);
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
  const double clip = (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm) ? cfg_.clip_norm / norm : 1.0;
  ++steps_;
  const double lr = cfg_.learning_rate;
  for (auto &p : params.params()) {
    if (!p.value.has_grad()) continue;
    auto g = p.value.grad();
    auto &w = p.value.vec();
    if (cfg_.kind == "sgd") {
      if (cfg_.momentum == 0.0) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * (clip * g[i]);
        continue;
      }
      auto &m = state_[p.name + "/m"];
      if (m.empty()) m.assign(w.size(), 0.0);
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = cfg_.momentum * m[i] + clip * g[i];
        w[i] -= lr * m[i];
      }
    } else {
      auto &m = state_[p.name + "/m"];
      auto &v = state_[p.name + "/v"];
      if (m.empty()) m.assign(w.size(), 0.0);
      if (v.empty()) v.assign(w.size(), 0.0);
      const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
      const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = clip * g[i];
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
        w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
      }
    }
  }
  return norm;
}

void Optimizer::set_state(std::map<std::string, std::vector<double>> state, std::int64_t steps) {
  state_ = std::move(state);
  steps_ = steps;
}

}  // namespace nrt
