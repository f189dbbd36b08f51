// nrt/src/pruning.cc

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

#include "nrt/pruning.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace nrt {

PruneSchedule PruneSchedule::LargePreset(double final_sparsity) {
  PruneSchedule s;
  s.final_sparsity = final_sparsity;
  s.num_updates = 256;
  s.delta_t = 256;
  return s;
}

bool PruneSchedule::IsUpdateStep(std::int64_t t) const {
  if (t < t0 || t > end_step()) return false;
  return (t - t0) % delta_t == 0;
}

void PruneSchedule::Validate() const {
  if (!(final_sparsity >= 0.0 && final_sparsity < 1.0)) {
    throw ConfigError("prune.target must be in [0, 1)");
  }
  if (t0 < 0 || num_updates <= 0 || delta_t <= 0) {
    throw ConfigError("prune.t0 must be >= 0 and prune.n, prune.delta_t positive");
  }
  if (block_rows == 0 || block_cols == 0) throw ConfigError("prune.block must be positive");
}

void ParseBlockShape(const std::string &text, std::size_t &rows, std::size_t &cols) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    rows = std::stoul(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    cols = std::stoul(text.substr(x + 1), &used);
    if (used != text.size() - x - 1) throw std::invalid_argument(text);
  } catch (const std::logic_error &) {
    throw ConfigError("prune.block: expected ROWSxCOLS, got '" + text + "'");
  }
  if (rows == 0 || cols == 0) throw ConfigError("prune.block: zero-sized block '" + text + "'");
}

double ScheduleSparsity(std::int64_t t, const PruneSchedule &sched) {
  if (t <= sched.t0) return 0.0;
  if (t >= sched.end_step()) return sched.final_sparsity;
  const double frac = static_cast<double>(t - sched.t0) /
                      static_cast<double>(sched.num_updates * sched.delta_t);
  const double rest = 1.0 - frac;
  return sched.final_sparsity * (1.0 - rest * rest * rest);
}

double ScaledDropout(double base_p, double sparsity) {
  if (!(sparsity >= 0.0 && sparsity < 1.0)) throw ConfigError("sparsity must be in [0, 1)");
  return base_p * (1.0 - sparsity);
}

BlockMask::BlockMask(std::size_t rows, std::size_t cols, std::size_t block_rows,
                     std::size_t block_cols)
    : rows_(rows), cols_(cols), block_rows_(block_rows), block_cols_(block_cols) {
  if (block_rows == 0 || block_cols == 0) throw ConfigError("block shape must be positive");
  grid_rows_ = (rows + block_rows - 1) / block_rows;
  grid_cols_ = (cols + block_cols - 1) / block_cols;
  alive_.assign(grid_rows_ * grid_cols_, 1);
}

std::size_t BlockMask::num_pruned_blocks() const {
  return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), 0));
}

std::vector<double> BlockMask::BlockNorms(const Tensor &w) const {
  std::vector<double> sq(alive_.size(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) {
      const double v = w.vec()[r * cols_ + c];
      sq[(r / block_rows_) * grid_cols_ + c / block_cols_] += v * v;
    }
  for (double &v : sq) v = std::sqrt(v);
  return sq;
}

Tensor BlockMask::Dense() const {
  Tensor m({rows_, cols_});
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) m.vec()[r * cols_ + c] = KeepsEntry(r, c) ? 1.0 : 0.0;
  return m;
}

double BlockMask::sparsity() const {
  if (rows_ * cols_ == 0) return 0.0;
  std::size_t zeros = 0;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) zeros += !KeepsEntry(r, c);
  return static_cast<double>(zeros) / static_cast<double>(rows_ * cols_);
}

void BlockMask::set_alive_flags(std::vector<std::uint8_t> flags) {
  if (flags.size() != alive_.size()) {
    throw CheckpointError("block mask has " + std::to_string(flags.size()) + " blocks, expected " +
                          std::to_string(alive_.size()));
  }
  alive_ = std::move(flags);
}

std::string SparsityReport::ToJson() const {
  nlohmann::json j;
  j["event"] = "prune";
  j["step"] = step;
  j["target"] = target;
  j["global_sparsity"] = global;
  j["per_matrix"] = per_matrix;
  return j.dump();
}

MaskSet::MaskSet(const ModelParams &params, std::size_t block_rows, std::size_t block_cols) {
  for (const auto &p : params.params()) {
    if (p.component != Component::kEncoder || !p.is_matrix()) continue;
    masks_.emplace(p.name, BlockMask(p.value.rows(), p.value.cols(), block_rows, block_cols));
  }
}

const BlockMask *MaskSet::Find(const std::string &name) const {
  auto it = masks_.find(name);
  return it == masks_.end() ? nullptr : &it->second;
}

void MaskSet::Update(const ModelParams &params, double target) {
  if (!(target >= 0.0 && target < 1.0)) throw ConfigError("sparsity target must be in [0, 1)");
  if (target < target_) {
    throw StateError("sparsity target decreased from " + std::to_string(target_) + " to " +
                     std::to_string(target));
  }
  for (auto &[name, mask] : masks_) {
    const auto wanted = static_cast<std::size_t>(
        std::floor(target * static_cast<double>(mask.num_blocks()) + 1e-9));
    std::size_t pruned = mask.num_pruned_blocks();
    if (pruned >= wanted) continue;
    const auto norms = mask.BlockNorms(params.Get(name));
    std::vector<std::size_t> order;
    for (std::size_t b = 0; b < mask.num_blocks(); ++b)
      if (mask.alive(b)) order.push_back(b);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
    for (std::size_t i = 0; pruned < wanted; ++i, ++pruned) mask.Prune(order[i]);
  }
  target_ = target;
}

void MaskSet::Apply(ModelParams &params) const {
  for (const auto &[name, mask] : masks_) {
    if (!params.Contains(name)) throw ConfigError("mask for unknown parameter " + name);
    Tensor &w = params.Get(name);
    if (w.dim() != 2 || w.rows() != mask.rows() || w.cols() != mask.cols()) {
      throw ConfigError("mask shape [" + std::to_string(mask.rows()) + "x" +
                        std::to_string(mask.cols()) + "] does not match " + name + " " +
                        ShapeToString(w.shape()));
    }
    for (std::size_t r = 0; r < mask.rows(); ++r)
      for (std::size_t c = 0; c < mask.cols(); ++c)
        if (!mask.KeepsEntry(r, c)) w.vec()[r * mask.cols() + c] = 0.0;
  }
}

void MaskSet::MaskGradients(ModelParams &params) const {
  for (const auto &[name, mask] : masks_) {
    Tensor &w = params.Get(name);
    if (!w.has_grad()) continue;
    auto g = w.grad();
    for (std::size_t r = 0; r < mask.rows(); ++r)
      for (std::size_t c = 0; c < mask.cols(); ++c)
        if (!mask.KeepsEntry(r, c)) g[r * mask.cols() + c] = 0.0;
  }
}

double MaskSet::GlobalSparsity() const {
  double zeros = 0.0, total = 0.0;
  for (const auto &[name, mask] : masks_) {
    const double n = static_cast<double>(mask.rows() * mask.cols());
    zeros += mask.sparsity() * n;
    total += n;
  }
  return total > 0.0 ? zeros / total : 0.0;
}

SparsityReport MaskSet::Report(std::int64_t step) const {
  SparsityReport r;
  r.step = step;
  r.target = target_;
  for (const auto &[name, mask] : masks_) r.per_matrix[name] = mask.sparsity();
  r.global = GlobalSparsity();
  return r;
}

double MeasuredEncoderSparsity(const ModelParams &params) {
  double zeros = 0.0, total = 0.0;
  for (const auto &p : params.params()) {
    if (p.component != Component::kEncoder || !p.is_matrix()) continue;
    for (double v : p.value.data()) zeros += (v == 0.0);
    total += static_cast<double>(p.value.numel());
  }
  return total > 0.0 ? zeros / total : 0.0;
}

}  // namespace nrt
