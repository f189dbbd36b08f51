// nrt/src/transducer.cc

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

#include "nrt/transducer.h"

#include <spdlog/spdlog.h>

#include <cmath>
#include <memory>
#include <string>

namespace nrt {

namespace {

bool IsLogZero(double v) { return v <= kLogZero / 2; }

struct LatticeView {
  const std::vector<double> &lp;
  std::span<const int> labels;
  std::size_t U1, V1;
  double at(std::size_t t, std::size_t u, std::size_t k) const { return lp[(t * U1 + u) * V1 + k]; }
  double blank(std::size_t t, std::size_t u) const { return at(t, u, V1 - 1); }
  double emit(std::size_t t, std::size_t u) const {
    return at(t, u, static_cast<std::size_t>(labels[u]));
  }
};

LatticeView CheckInputs(const Tensor &log_probs, std::span<const int> labels) {
  if (log_probs.dim() != 3) {
    throw DimensionError("transducer loss expects T x (U+1) x (V+1) log-probs, got " +
                         ShapeToString(log_probs.shape()));
  }
  const auto &s = log_probs.shape();
  if (s[1] != labels.size() + 1) {
    throw DimensionError("transducer loss: " + std::to_string(labels.size()) +
                         " labels but lattice " + ShapeToString(s));
  }
  if (s[2] < 2) throw DimensionError("transducer loss: need at least one token besides blank");
  if (s[0] == 0) {
    throw DataError("transducer loss: no frames to align " + std::to_string(labels.size()) +
                    " labels");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= s[2] - 1) {
      throw DataError("transducer loss: label " + std::to_string(y) + " outside [0, " +
                      std::to_string(s[2] - 1) + ")");
    }
  }
  for (double v : log_probs.data()) {
    if (std::isnan(v) || v == INFINITY) throw NumericError("transducer loss: non-finite log-prob");
  }
  return LatticeView{log_probs.vec(), labels, s[1], s[2]};
}

void WarnIfUnnormalized(const LatticeView &lv, std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < lv.V1; ++k) sum += std::exp(lv.lp[r * lv.V1 + k]);
    if (std::abs(sum - 1.0) > 1e-6) {
      spdlog::warn("transducer loss: lattice row {} sums to {} (expected normalized log-probs)", r,
                   sum);
      return;
    }
  }
}

Tensor LossFromLattice(const Tensor &log_probs, TransducerLattice lattice, const char *name) {
  Tensor out = Tensor::Scalar(-lattice.log_likelihood_alpha);
  auto grad = std::make_shared<std::vector<double>>(std::move(lattice.grad));
  auto in = log_probs.storage();
  return RecordOp(name, out, {log_probs}, [in, grad](const TensorStorage &o) {
    auto g = GradBuffer(*in);
    const double seed = o.grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed * (*grad)[i];
  });
}

}  // namespace

double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (IsLogZero(a)) return kLogZero;
  if (IsLogZero(b)) return a;
  return a + std::log1p(std::exp(b - a));
}

AlignmentBand AlignmentBand::Full(std::size_t num_frames, std::size_t num_labels) {
  AlignmentBand band;
  band.t_left.assign(num_labels + 1, 0);
  band.t_right.assign(num_labels + 1, num_frames == 0 ? 0 : num_frames - 1);
  return band;
}

AlignmentBand AlignmentBand::FromReference(std::span<const std::size_t> label_frames,
                                           std::size_t num_frames, std::size_t left_buffer,
                                           std::size_t right_buffer) {
  const std::size_t U = label_frames.size();
  for (std::size_t u = 0; u < U; ++u) {
    if (label_frames[u] >= num_frames || (u && label_frames[u] < label_frames[u - 1])) {
      throw DataError("alignment band: reference frames must be non-decreasing and < " +
                      std::to_string(num_frames));
    }
  }
  AlignmentBand band;
  band.t_left.resize(U + 1);
  band.t_right.resize(U + 1);
  for (std::size_t u = 0; u <= U; ++u) {
    band.t_left[u] = u == 0 ? 0 : label_frames[u - 1] - std::min(label_frames[u - 1], left_buffer);
    band.t_right[u] = u == U ? num_frames - 1
                             : std::min(num_frames - 1, label_frames[u] + right_buffer);
  }
  band.Validate(num_frames, U);
  return band;
}

void AlignmentBand::Validate(std::size_t num_frames, std::size_t num_labels) const {
  auto fail = [](const std::string &why) { throw DataError("infeasible alignment band: " + why); };
  if (t_left.size() != num_labels + 1 || t_right.size() != num_labels + 1) {
    fail("expected " + std::to_string(num_labels + 1) + " windows");
  }
  if (num_frames == 0) fail("no frames");
  if (t_left[0] != 0) fail("start node (0, 0) excluded");
  if (t_right[num_labels] != num_frames - 1) fail("final node (T-1, U) excluded");
  for (std::size_t u = 0; u <= num_labels; ++u) {
    if (t_left[u] > t_right[u] || t_right[u] >= num_frames) {
      fail("empty or out-of-range window at u=" + std::to_string(u));
    }
    if (u && (t_left[u] < t_left[u - 1] || t_right[u] < t_right[u - 1])) {
      fail("windows not monotone at u=" + std::to_string(u));
    }
    if (u && t_left[u] > t_right[u - 1]) {
      fail("no emission edge from u=" + std::to_string(u - 1));
    }
  }
}

double TransducerLattice::Occupancy(std::size_t t, std::size_t u) const {
  const double a = Alpha(t, u), b = Beta(t, u);
  if (IsLogZero(a) || IsLogZero(b)) return 0.0;
  return std::exp(a + b - log_likelihood_alpha);
}

TransducerLattice ComputeLattice(const Tensor &log_probs, std::span<const int> labels,
                                 const AlignmentBand *band) {
  const LatticeView lv = CheckInputs(log_probs, labels);
  const std::size_t T = log_probs.shape()[0], U = labels.size(), U1 = U + 1;
  if (band) band->Validate(T, U);
  WarnIfUnnormalized(lv, T * U1);

  TransducerLattice L;
  L.num_frames = T;
  L.num_labels = U;
  L.alpha.assign(T * U1, kLogZero);
  L.beta.assign(T * U1, kLogZero);
  auto in_band = [&](std::size_t t, std::size_t u) { return !band || band->Contains(t, u); };

  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u < U1; ++u) {
      if (!in_band(t, u)) continue;
      double a = (t == 0 && u == 0) ? 0.0 : kLogZero;
      if (t > 0) a = LogAdd(a, L.alpha[(t - 1) * U1 + u] + lv.blank(t - 1, u));
      if (u > 0) a = LogAdd(a, L.alpha[t * U1 + u - 1] + lv.emit(t, u - 1));
      L.alpha[t * U1 + u] = a;
    }
  }
  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t u = U1; u-- > 0;) {
      if (!in_band(t, u)) continue;
      double b = kLogZero;
      if (t == T - 1 && u == U) b = lv.blank(t, u);
      if (t + 1 < T) b = LogAdd(b, L.beta[(t + 1) * U1 + u] + lv.blank(t, u));
      if (u < U) b = LogAdd(b, L.beta[t * U1 + u + 1] + lv.emit(t, u));
      L.beta[t * U1 + u] = b;
    }
  }
  L.log_likelihood_alpha = L.alpha[(T - 1) * U1 + U] + lv.blank(T - 1, U);
  L.log_likelihood_beta = L.beta[0];
  if (IsLogZero(L.log_likelihood_alpha)) {
    throw NumericError("transducer loss: labels have zero probability under the lattice");
  }

  const double ll = L.log_likelihood_alpha;
  L.grad.assign(log_probs.numel(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u < U1; ++u) {
      const double a = L.alpha[t * U1 + u];
      if (IsLogZero(a)) continue;
      const std::size_t row = (t * U1 + u) * lv.V1;
      double next = kLogZero;
      if (t == T - 1 && u == U) next = 0.0;
      else if (t + 1 < T) next = L.beta[(t + 1) * U1 + u];
      if (!IsLogZero(next)) L.grad[row + lv.V1 - 1] = -std::exp(a + lv.blank(t, u) + next - ll);
      if (u < U) {
        const double b = L.beta[t * U1 + u + 1];
        if (!IsLogZero(b)) L.grad[row + labels[u]] -= std::exp(a + lv.emit(t, u) + b - ll);
      }
    }
  }
  return L;
}

Tensor TransducerLoss(const Tensor &log_probs, std::span<const int> labels) {
  return LossFromLattice(log_probs, ComputeLattice(log_probs, labels), "transducer_loss");
}

Tensor RestrictedTransducerLoss(const Tensor &log_probs, std::span<const int> labels,
                                const AlignmentBand &band) {
  return LossFromLattice(log_probs, ComputeLattice(log_probs, labels, &band),
                         "restricted_transducer_loss");
}

double EnumerateAlignmentsOracle(const Tensor &log_probs, std::span<const int> labels,
                                 const AlignmentBand *band, std::size_t *num_paths) {
  const LatticeView lv = CheckInputs(log_probs, labels);
  const std::size_t T = log_probs.shape()[0], U = labels.size();
  if (T + U > 9) {
    throw ConfigError("alignment enumeration refuses T + U = " + std::to_string(T + U) +
                      " (limit 9)");
  }
  std::vector<double> scores;
  // Depth-first over blank/emit moves; every path ends with the blank out
  // of (T-1, U).
  auto walk = [&](auto &&self, std::size_t t, std::size_t u, double score) -> void {
    if (band && !band->Contains(t, u)) return;
    if (t == T - 1 && u == U) {
      scores.push_back(score + lv.blank(t, u));
      return;
    }
    if (t + 1 < T) self(self, t + 1, u, score + lv.blank(t, u));
    if (u < U) self(self, t, u + 1, score + lv.emit(t, u));
  };
  walk(walk, 0, 0, 0.0);
  if (num_paths) *num_paths = scores.size();
  if (scores.empty()) return -kLogZero;
  double mx = scores[0];
  for (double s : scores) mx = std::max(mx, s);
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - mx);
  return -(mx + std::log(sum));
}

}  // namespace nrt
