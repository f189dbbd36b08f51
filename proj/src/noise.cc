// nrt/src/noise.cc

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

#include "nrt/noise.h"

#include <cmath>

namespace nrt {

void NoiseConfig::Validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("noise.alpha must be >= 0");
  if (!(lambda >= 0.0)) throw ConfigError("noise.lambda must be >= 0");
  if (!(logit_std >= 0.0)) throw ConfigError("noise.logit_std must be >= 0");
  if (alpha > 0.0 && targets.empty()) throw ConfigError("noise.targets is empty");
}

Tensor SampleColumnNoise(const Tensor &w, double alpha, RngStream &rng, const BlockMask *mask) {
  if (!(alpha >= 0.0)) throw ConfigError("noise alpha must be >= 0");
  const std::size_t rows = w.dim() == 1 ? w.numel() : w.rows();
  const std::size_t cols = w.dim() == 1 ? 1 : w.cols();
  if (w.dim() > 2) throw DimensionError("column noise needs a vector or matrix");
  if (mask && (mask->rows() != rows || mask->cols() != cols)) {
    throw ConfigError("noise mask does not match " + ShapeToString(w.shape()));
  }
  Tensor noise(w.shape());
  if (alpha == 0.0) return noise;
  std::vector<double> eps(rows);
  for (std::size_t j = 0; j < cols; ++j) {
    double wn = 0.0;
    for (std::size_t i = 0; i < rows; ++i) wn += w.vec()[i * cols + j] * w.vec()[i * cols + j];
    wn = std::sqrt(wn);
    bool any_kept = !mask;
    if (mask)
      for (std::size_t i = 0; i < rows && !any_kept; ++i) any_kept = mask->KeepsEntry(i, j);
    double en = 0.0;
    do {
      en = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        eps[i] = rng.Normal();
        if (mask && !mask->KeepsEntry(i, j)) eps[i] = 0.0;
        en += eps[i] * eps[i];
      }
    } while (en == 0.0 && any_kept);
    if (wn == 0.0 || en == 0.0) continue;
    const double scale = alpha * wn / std::sqrt(en);
    for (std::size_t i = 0; i < rows; ++i) noise.vec()[i * cols + j] = scale * eps[i];
  }
  return noise;
}

PerturbationRecord PerturbParams(ModelParams &params, const NoiseConfig &cfg, RngStream &rng,
                                 const MaskSet *masks) {
  if (params.perturbed()) throw StateError("parameters already carry an unrestored perturbation");
  cfg.Validate();
  Tape::NoGrad no_grad;
  PerturbationRecord rec;
  rec.active = true;
  params.set_perturbed(true);
  if (cfg.alpha == 0.0) return rec;
  for (auto &p : params.params()) {
    if (!cfg.targets.count(p.component)) continue;
    if (cfg.matrices_only && !p.is_matrix()) continue;
    const BlockMask *mask = masks ? masks->Find(p.name) : nullptr;
    Tensor noise = SampleColumnNoise(p.value, cfg.alpha, rng, mask);
    rec.names.push_back(p.name);
    rec.clean.push_back(p.value.vec());
    auto &data = p.value.vec();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += noise.vec()[i];
    rec.noise.push_back(std::move(noise));
  }
  return rec;
}

void RestoreParams(ModelParams &params, PerturbationRecord &record) {
  if (!record.active || !params.perturbed()) {
    throw StateError("no outstanding perturbation to restore");
  }
  for (std::size_t i = 0; i < record.names.size(); ++i) {
    params.Get(record.names[i]).vec() = record.clean[i];
  }
  record.active = false;
  params.set_perturbed(false);
}

Tensor L2Penalty(const ModelParams &params, double lambda, const ComponentSet &targets,
                 bool matrices_only) {
  if (!(lambda >= 0.0)) throw ConfigError("L2 lambda must be >= 0");
  std::vector<Tensor> terms;
  for (const auto &p : params.params()) {
    if (!targets.count(p.component) || (matrices_only && !p.is_matrix())) continue;
    terms.push_back(SquaredNorm(p.value));
  }
  if (terms.empty() || lambda == 0.0) return Tensor::Scalar(0.0);
  Tensor total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = Add(total, terms[i]);
  return Scale(total, 0.5 * lambda);
}

}  // namespace nrt
