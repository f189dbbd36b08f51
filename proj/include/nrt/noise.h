// nrt/noise.h

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

#ifndef NRT_NOISE_H_
#define NRT_NOISE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "nrt/params.h"
#include "nrt/pruning.h"
#include "nrt/rng.h"
#include "nrt/tensor.h"

namespace nrt {

struct NoiseConfig {
  double alpha = 0.01;        // noise norm relative to each column's norm
  ComponentSet targets = AllComponents();
  double lambda = 0.1;        // L2 coefficient
  double logit_std = 0.0;     // Gaussian noise on joiner logits
  std::uint64_t seed = 1;
  // Biases and norm gains are left clean unless this is cleared.
  bool matrices_only = true;

  void Validate() const;
};

// For each column j of w: eps ~ N(0, I), noise_j = alpha * |w_j| / |eps| * eps.
// Columns of zero norm get zero noise. When `mask` is given, eps is masked
// before normalisation so pruned entries stay zero. Always consumes rows()
// normals per column when alpha > 0 (plus redraws), none when alpha == 0.
Tensor SampleColumnNoise(const Tensor &w, double alpha, RngStream &rng,
                         const BlockMask *mask = nullptr);

// Noise added by one PerturbParams call plus the clean values it replaced.
struct PerturbationRecord {
  std::vector<std::string> names;
  std::vector<Tensor> noise;
  std::vector<std::vector<double>> clean;
  bool active = false;
};

// Adds fresh column noise to every targeted parameter in place. Runs outside
// any tape, so the scale factors are constants to autodiff. A second call
// before RestoreParams is a StateError.
PerturbationRecord PerturbParams(ModelParams &params, const NoiseConfig &cfg, RngStream &rng,
                                 const MaskSet *masks = nullptr);

// Copies the clean values back (bit-exact) and closes the record.
void RestoreParams(ModelParams &params, PerturbationRecord &record);

// (lambda / 2) * sum ||w||^2 over targeted weight matrices (all tensors when
// matrices_only is false), recorded on the active tape.
Tensor L2Penalty(const ModelParams &params, double lambda,
                 const ComponentSet &targets = AllComponents(), bool matrices_only = true);

}  // namespace nrt

#endif  // NRT_NOISE_H_
