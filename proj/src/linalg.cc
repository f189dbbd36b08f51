// nrt/src/linalg.cc

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

#include "nrt/linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nrt {

SingularValues ComputeSingularValues(const Tensor &w) {
  if (w.dim() != 2 || w.size(0) == 0 || w.size(1) == 0) {
    throw DimensionError("ComputeSingularValues: need a non-empty matrix, got " +
                         ShapeToString(w.shape()));
  }
  for (double v : w.data()) {
    if (!std::isfinite(v)) throw NumericError("ComputeSingularValues: non-finite entry");
  }
  // Work on the tall orientation; columns of `a` get orthogonalised.
  const bool transpose = w.size(0) < w.size(1);
  const std::size_t m = transpose ? w.size(1) : w.size(0);
  const std::size_t n = transpose ? w.size(0) : w.size(1);
  // Column-major copy so each column is contiguous.
  std::vector<double> a(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[j * m + i] = transpose ? w.at(j, i) : w.at(i, j);

  constexpr double kTol = 1e-15;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double *cp = a.data() + p * m;
        double *cq = a.data() + q * m;
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (gamma == 0.0 || std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = cp[i], y = cq[i];
          cp[i] = c * x - s * y;
          cq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }

  SingularValues out;
  out.raw.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a[j * m + i] * a[j * m + i];
    out.raw[j] = std::sqrt(s);
  }
  std::sort(out.raw.begin(), out.raw.end(), std::greater<>());
  out.normalized.resize(n, 0.0);
  if (out.raw[0] > 0) {
    for (std::size_t j = 0; j < n; ++j) out.normalized[j] = out.raw[j] / out.raw[0];
  }
  return out;
}

GradCheckResult FiniteDifferenceCheck(
    const std::function<Tensor(const ModelParams &)> &f, ModelParams &params,
    const GradCheckOptions &options) {
  if (!(options.step > 0)) throw ConfigError("FiniteDifferenceCheck: step must be > 0");
  const std::size_t total = params.NumScalars();
  if (total > options.max_coords && options.max_coords < 64) {
    throw ConfigError("FiniteDifferenceCheck: need at least 64 sampled coordinates");
  }

  params.ZeroGrad();
  {
    Tape tape;
    Tape::Scope scope(tape);
    Tensor loss = f(params);
    if (std::isnan(loss.item())) throw NumericError("FiniteDifferenceCheck: f returned NaN");
    tape.Backward(loss);
  }

  // Flat coordinate -> (param, offset)
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  coords.reserve(total);
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t i = 0; i < params.params()[p].value.numel(); ++i)
      coords.emplace_back(p, i);
  if (total > options.max_coords) {
    RngStream rng(options.seed);
    // Partial Fisher-Yates for a sample without replacement.
    for (std::size_t i = 0; i < options.max_coords; ++i) {
      auto j = static_cast<std::size_t>(
          rng.UniformInt(static_cast<std::int64_t>(i), static_cast<std::int64_t>(total - 1)));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(options.max_coords);
  }

  GradCheckResult result;
  Tape::NoGrad no_grad;
  auto eval = [&]() {
    const double v = f(params).item();
    if (std::isnan(v)) throw NumericError("FiniteDifferenceCheck: f returned NaN");
    return v;
  };
  for (auto [p, i] : coords) {
    Tensor &value = params.params()[p].value;
    const double analytic = value.has_grad() ? value.grad()[i] : 0.0;
    const double saved = value.vec()[i];
    value.vec()[i] = saved + options.step;
    const double up = eval();
    value.vec()[i] = saved - options.step;
    const double down = eval();
    value.vec()[i] = saved;
    const double numeric = (up - down) / (2.0 * options.step);
    const double denom = std::max({std::abs(analytic), std::abs(numeric),
                                   options.denominator_floor});
    const double err = std::abs(analytic - numeric) / denom;
    ++result.coords_checked;
    if (err > result.max_rel_error || result.coords_checked == 1) {
      result.max_rel_error = std::max(result.max_rel_error, err);
      if (err >= result.max_rel_error) {
        result.worst_param = params.params()[p].name;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace nrt
