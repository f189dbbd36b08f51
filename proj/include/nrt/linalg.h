// nrt/linalg.h

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

#ifndef NRT_LINALG_H_
#define NRT_LINALG_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nrt/params.h"
#include "nrt/tensor.h"

namespace nrt {

struct SingularValues {
  std::vector<double> raw;         // descending
  std::vector<double> normalized;  // raw / raw[0] (all zeros if raw[0] == 0)
};

// One-sided Jacobi SVD of an m x n matrix; returns min(m, n) values.
SingularValues ComputeSingularValues(const Tensor &w);

struct GradCheckOptions {
  double step = 1e-4;
  // Coordinates compared against central differences. All coordinates are
  // checked when the model has fewer; must be at least 64 otherwise.
  std::size_t max_coords = 256;
  std::uint64_t seed = 17;
  // Relative error is |a - n| / max(|a|, |n|, denominator_floor).
  double denominator_floor = 1e-6;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares tape gradients of scalar f(params) with central differences.
// `f` must be deterministic (evaluate in eval mode or with reseeded RNGs).
GradCheckResult FiniteDifferenceCheck(
    const std::function<Tensor(const ModelParams &)> &f, ModelParams &params,
    const GradCheckOptions &options = {});

}  // namespace nrt

#endif  // NRT_LINALG_H_
