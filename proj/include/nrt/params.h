// nrt/params.h

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

#ifndef NRT_PARAMS_H_
#define NRT_PARAMS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nrt/tensor.h"

namespace nrt {

enum class Component { kEncoder, kPredictor, kJoiner };

const char *ComponentName(Component c);
std::optional<Component> ParseComponent(std::string_view name);

using ComponentSet = std::set<Component>;
inline ComponentSet AllComponents() {
  return {Component::kEncoder, Component::kPredictor, Component::kJoiner};
}

struct Param {
  std::string name;
  Component component;
  Tensor value;

  // 2-D weight matrices are the ones that receive column noise, L2 and
  // pruning. Biases, LayerNorm gains and other vectors are not.
  bool is_matrix() const { return value.dim() == 2; }
};

// Named parameter registry, iterated in registration order.
class ModelParams {
 public:
  ModelParams() = default;

  // Registers a trainable tensor. Names must be unique.
  Tensor &Add(const std::string &name, Component component, Tensor init);

  bool Contains(const std::string &name) const { return index_.count(name) != 0; }
  const Tensor &Get(const std::string &name) const;
  Tensor &Get(const std::string &name);
  const Param &GetParam(const std::string &name) const;

  std::vector<Param> &params() { return params_; }
  const std::vector<Param> &params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t NumScalars() const;

  void ZeroGrad();

  // Deep copy (values only; gradients dropped). Evaluation snapshots use this.
  ModelParams Clone() const;

  // Set while a noise perturbation is outstanding on these parameters.
  bool perturbed() const { return perturbed_; }
  void set_perturbed(bool v) { perturbed_ = v; }

 private:
  std::vector<Param> params_;
  std::map<std::string, std::size_t> index_;
  bool perturbed_ = false;
};

// Coordinate-wise bit equality of two registries with the same layout.
bool BitIdentical(const ModelParams &a, const ModelParams &b);

}  // namespace nrt

#endif  // NRT_PARAMS_H_
