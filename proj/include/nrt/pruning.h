// nrt/pruning.h

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

#ifndef NRT_PRUNING_H_
#define NRT_PRUNING_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nrt/params.h"
#include "nrt/tensor.h"

namespace nrt {

struct PruneSchedule {
  double final_sparsity = 0.0;
  std::int64_t t0 = 0;
  std::int64_t num_updates = 8;
  std::int64_t delta_t = 20;
  // Block shape on the d_in x d_out layout; "8x1" is eight input rows of one
  // output column.
  std::size_t block_rows = 8;
  std::size_t block_cols = 1;

  static PruneSchedule LargePreset(double final_sparsity);

  bool enabled() const { return final_sparsity > 0.0; }
  std::int64_t end_step() const { return t0 + num_updates * delta_t; }
  // True at t0, t0 + delta_t, ..., t0 + n * delta_t.
  bool IsUpdateStep(std::int64_t t) const;
  void Validate() const;
};

// Parses "8x1" style block shapes.
void ParseBlockShape(const std::string &text, std::size_t &rows, std::size_t &cols);

// s_f * (1 - (1 - (t - t0) / (n * dt))^3), clamped to [0, s_f] outside the
// pruning window.
double ScheduleSparsity(std::int64_t t, const PruneSchedule &sched);

// Encoder dropout shrinks linearly with sparsity: base * (1 - v).
double ScaledDropout(double base_p, double sparsity);

class BlockMask {
 public:
  BlockMask() = default;
  BlockMask(std::size_t rows, std::size_t cols, std::size_t block_rows, std::size_t block_cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t block_rows() const { return block_rows_; }
  std::size_t block_cols() const { return block_cols_; }
  std::size_t grid_rows() const { return grid_rows_; }
  std::size_t grid_cols() const { return grid_cols_; }
  std::size_t num_blocks() const { return alive_.size(); }
  std::size_t num_pruned_blocks() const;
  bool alive(std::size_t block) const { return alive_[block] != 0; }
  void Prune(std::size_t block) { alive_[block] = 0; }
  bool KeepsEntry(std::size_t r, std::size_t c) const {
    return alive_[(r / block_rows_) * grid_cols_ + c / block_cols_] != 0;
  }

  // L2 norm of each block of `w` (remnant blocks score over what they hold).
  std::vector<double> BlockNorms(const Tensor &w) const;
  Tensor Dense() const;
  // Fraction of matrix entries masked out.
  double sparsity() const;

  const std::vector<std::uint8_t> &alive_flags() const { return alive_; }
  void set_alive_flags(std::vector<std::uint8_t> flags);

 private:
  std::size_t rows_ = 0, cols_ = 0, block_rows_ = 8, block_cols_ = 1;
  std::size_t grid_rows_ = 0, grid_cols_ = 0;
  std::vector<std::uint8_t> alive_;
};

struct SparsityReport {
  std::int64_t step = 0;
  double target = 0.0;
  std::map<std::string, double> per_matrix;
  double global = 0.0;

  std::string ToJson() const;
};

// Masks over every encoder weight matrix. Masks only grow.
class MaskSet {
 public:
  MaskSet() = default;
  MaskSet(const ModelParams &params, std::size_t block_rows, std::size_t block_cols);

  bool empty() const { return masks_.empty(); }
  double target() const { return target_; }
  const std::map<std::string, BlockMask> &masks() const { return masks_; }
  std::map<std::string, BlockMask> &masks() { return masks_; }
  const BlockMask *Find(const std::string &name) const;

  // Zeroes, per matrix, the lowest-norm live blocks until
  // floor(target * num_blocks) blocks are pruned. Ties go to the lower block
  // index. A target below the current one is a StateError.
  void Update(const ModelParams &params, double target);
  void set_target(double t) { target_ = t; }

  // Zeroes masked weights; a missing or mis-shaped parameter is a ConfigError.
  void Apply(ModelParams &params) const;
  // Zeroes gradients of masked weights.
  void MaskGradients(ModelParams &params) const;

  // Fraction of zero entries over all masked matrices.
  double GlobalSparsity() const;
  SparsityReport Report(std::int64_t step) const;

 private:
  std::map<std::string, BlockMask> masks_;
  double target_ = 0.0;
};

// Zero fraction over the encoder weight matrices, counted from values.
double MeasuredEncoderSparsity(const ModelParams &params);

}  // namespace nrt

#endif  // NRT_PRUNING_H_
