// nrt/optimizer.h

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

#ifndef NRT_OPTIMIZER_H_
#define NRT_OPTIMIZER_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nrt/params.h"

namespace nrt {

struct OptimizerConfig {
  std::string kind = "sgd";  // sgd | adam
  double learning_rate = 0.05;
  double momentum = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables

  void Validate() const;
};

// First-order update on ModelParams gradients. State is keyed by parameter
// name so it can be checkpointed.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg = {});

  const OptimizerConfig &config() const { return cfg_; }
  std::int64_t steps() const { return steps_; }

  // Applies one update and returns the (pre-clip) global gradient norm.
  double Step(ModelParams &params);

  // Named state buffers ("<param>/m", "<param>/v") for checkpoints.
  const std::map<std::string, std::vector<double>> &state() const { return state_; }
  void set_state(std::map<std::string, std::vector<double>> state, std::int64_t steps);

 private:
  OptimizerConfig cfg_;
  std::int64_t steps_ = 0;
  std::map<std::string, std::vector<double>> state_;
};

double GlobalGradNorm(const ModelParams &params);

}  // namespace nrt

#endif  // NRT_OPTIMIZER_H_
