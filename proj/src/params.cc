// nrt/src/params.cc

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

#include "nrt/params.h"

#include <cstring>

namespace nrt {

const char *ComponentName(Component c) {
  switch (c) {
    case Component::kEncoder:
      return "encoder";
    case Component::kPredictor:
      return "predictor";
    case Component::kJoiner:
      return "joiner";
  }
  return "?";
}

std::optional<Component> ParseComponent(std::string_view name) {
  if (name == "encoder") return Component::kEncoder;
  if (name == "predictor") return Component::kPredictor;
  if (name == "joiner") return Component::kJoiner;
  return std::nullopt;
}

Tensor &ModelParams::Add(const std::string &name, Component component,
                         Tensor init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  init.set_requires_grad(true);
  index_[name] = params_.size();
  params_.push_back(Param{name, component, std::move(init)});
  return params_.back().value;
}

const Param &ModelParams::GetParam(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return params_[it->second];
}

const Tensor &ModelParams::Get(const std::string &name) const {
  return GetParam(name).value;
}

Tensor &ModelParams::Get(const std::string &name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return params_[it->second].value;
}

std::size_t ModelParams::NumScalars() const {
  std::size_t n = 0;
  for (const auto &p : params_) n += p.value.numel();
  return n;
}

void ModelParams::ZeroGrad() {
  for (auto &p : params_) p.value.ZeroGrad();
}

ModelParams ModelParams::Clone() const {
  ModelParams out;
  for (const auto &p : params_) {
    Tensor v = p.value.Clone();
    out.Add(p.name, p.component, v);
  }
  out.perturbed_ = perturbed_;
  return out;
}

bool BitIdentical(const ModelParams &a, const ModelParams &b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto &pa = a.params()[i], &pb = b.params()[i];
    if (pa.name != pb.name || pa.value.shape() != pb.value.shape()) return false;
    if (std::memcmp(pa.value.vec().data(), pb.value.vec().data(),
                    pa.value.numel() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

}  // namespace nrt
