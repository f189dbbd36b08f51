// nrt/transducer.h

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

#ifndef NRT_TRANSDUCER_H_
#define NRT_TRANSDUCER_H_

#include <cstddef>
#include <span>
#include <vector>

#include "nrt/error.h"
#include "nrt/tensor.h"

namespace nrt {

// Stand-in for log(0) in the lattice tables.
inline constexpr double kLogZero = -1e30;

double LogAdd(double a, double b);

// Per-u inclusive time windows [t_left[u], t_right[u]] of allowed lattice
// nodes (t, u); u ranges over 0..U.
struct AlignmentBand {
  std::vector<std::size_t> t_left;
  std::vector<std::size_t> t_right;

  static AlignmentBand Full(std::size_t num_frames, std::size_t num_labels);
  // `label_frames[u]` is the reference frame at which label u+1 is emitted.
  // Row u spans [frame of label u - left_buffer, frame of label u+1 + right_buffer].
  static AlignmentBand FromReference(std::span<const std::size_t> label_frames,
                                     std::size_t num_frames, std::size_t left_buffer,
                                     std::size_t right_buffer);

  bool Contains(std::size_t t, std::size_t u) const {
    return t >= t_left[u] && t <= t_right[u];
  }
  // Throws DataError if the band cannot hold a complete alignment.
  void Validate(std::size_t num_frames, std::size_t num_labels) const;
};

// Forward/backward tables of one utterance. log_probs is T x (U+1) x (V+1)
// after log-softmax; blank is the last class.
struct TransducerLattice {
  std::size_t num_frames = 0;
  std::size_t num_labels = 0;
  std::vector<double> alpha;  // T x (U+1), row-major
  std::vector<double> beta;
  double log_likelihood_alpha = kLogZero;
  double log_likelihood_beta = kLogZero;
  // d(-log p) / d log_probs, same layout as log_probs.
  std::vector<double> grad;

  double Alpha(std::size_t t, std::size_t u) const { return alpha[t * (num_labels + 1) + u]; }
  double Beta(std::size_t t, std::size_t u) const { return beta[t * (num_labels + 1) + u]; }
  // Posterior probability that an alignment passes through node (t, u).
  double Occupancy(std::size_t t, std::size_t u) const;
};

TransducerLattice ComputeLattice(const Tensor &log_probs, std::span<const int> labels,
                                 const AlignmentBand *band = nullptr);

// -log p(labels | x) as a scalar recorded on the active tape.
Tensor TransducerLoss(const Tensor &log_probs, std::span<const int> labels);
Tensor RestrictedTransducerLoss(const Tensor &log_probs, std::span<const int> labels,
                                const AlignmentBand &band);

// Brute-force -log p by listing every blank/emit path. Refuses lattices with
// T + U > 9. `num_paths` receives the number of paths summed.
double EnumerateAlignmentsOracle(const Tensor &log_probs, std::span<const int> labels,
                                 const AlignmentBand *band = nullptr,
                                 std::size_t *num_paths = nullptr);

// Greedy transducer search. `step(token, state)` advances the predictor and
// returns its new state; `joint(t, state)` returns log-probabilities (or
// logits) over V+1 classes for frame t.
template <typename State, typename StepFn, typename JointFn>
std::vector<int> GreedyDecode(std::size_t num_frames, int blank_id, State state,
                              StepFn step, JointFn joint, std::size_t max_symbols_per_frame) {
  if (max_symbols_per_frame == 0) throw ConfigError("max_symbols_per_frame must be >= 1");
  std::vector<int> hyp;
  for (std::size_t t = 0; t < num_frames; ++t) {
    for (std::size_t n = 0; n < max_symbols_per_frame; ++n) {
      const std::vector<double> scores = joint(t, state);
      int best = 0;
      for (int k = 1; k < static_cast<int>(scores.size()); ++k)
        if (scores[k] > scores[best]) best = k;
      if (best == blank_id) break;
      hyp.push_back(best);
      state = step(best, state);
    }
  }
  return hyp;
}

}  // namespace nrt

#endif  // NRT_TRANSDUCER_H_
