// nrt/tests/oracles.h

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

#ifndef NRT_TESTS_ORACLES_H_
#define NRT_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nrt/emformer.h"
#include "nrt/params.h"
#include "nrt/rng.h"
#include "nrt/tensor.h"

namespace nrt::testing {

// Plain row-major matrix used by the full-sequence oracle below.
struct Mat {
  std::size_t r = 0, c = 0;
  std::vector<double> v;
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : r(rows), c(cols), v(rows * cols, 0.0) {}
  double &operator()(std::size_t i, std::size_t j) { return v[i * c + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * c + j]; }
};

inline Mat FromTensor(const Tensor &t) {
  Mat m(t.dim() == 1 ? 1 : t.rows(), t.cols());
  m.v = t.vec();
  return m;
}

inline Mat Mul(const Mat &a, const Mat &b) {
  Mat out(a.r, b.c);
  for (std::size_t i = 0; i < a.r; ++i)
    for (std::size_t k = 0; k < a.c; ++k)
      for (std::size_t j = 0; j < b.c; ++j) out(i, j) += a(i, k) * b(k, j);
  return out;
}

inline void AddRowVector(Mat &m, const Mat &b) {
  for (std::size_t i = 0; i < m.r; ++i)
    for (std::size_t j = 0; j < m.c; ++j) m(i, j) += b.v[j];
}

inline Mat RowNorm(const Mat &x, const Mat &g, const Mat &b) {
  Mat out(x.r, x.c);
  for (std::size_t i = 0; i < x.r; ++i) {
    double mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < x.c; ++j) mean += x(i, j);
    mean /= x.c;
    for (std::size_t j = 0; j < x.c; ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= x.c;
    for (std::size_t j = 0; j < x.c; ++j)
      out(i, j) = (x(i, j) - mean) / std::sqrt(var + 1e-5) * g.v[j] + b.v[j];
  }
  return out;
}

// Runs the whole utterance at once: every segment's center and right-context
// rows sit in one sequence [C_0..C_{I-1}; R_0; ...; R_{I-1}], and a mask
// restricts a query of segment i to centers i-L..i and its own R_i.
inline Mat FullSequenceOracle(const Tensor &features, const EmformerConfig &cfg,
                       const ModelParams &p) {
  const std::size_t T = features.rows(), d = cfg.model_dim, seg = cfg.segment_length;
  const std::size_t rc = cfg.right_context_frames();
  const std::size_t I = (T + seg - 1) / seg;
  Mat x = Mul(FromTensor(features), FromTensor(p.Get("encoder.input.weight")));
  AddRowVector(x, FromTensor(p.Get("encoder.input.bias")));

  const std::size_t n = T + I * rc;
  Mat h(n, d);
  std::vector<std::size_t> seg_of(n);
  std::vector<bool> is_center(n);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < d; ++j) h(t, j) = x(t, j);
    seg_of[t] = t / seg;
    is_center[t] = true;
  }
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t k = 0; k < rc; ++k) {
      const std::size_t row = T + i * rc + k, src = (i + 1) * seg + k;
      seg_of[row] = i;
      is_center[row] = false;
      if (src < T)
        for (std::size_t j = 0; j < d; ++j) h(row, j) = x(src, j);
    }
  }
  auto allowed = [&](std::size_t q, std::size_t k) {
    const std::size_t i = seg_of[q], j = seg_of[k];
    if (is_center[k]) return j <= i && j + cfg.left_context_segments >= i;
    return j == i;
  };

  const std::size_t dh = d / cfg.num_heads;
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::string pre = EncoderLayerPrefix(l);
    auto P = [&](const std::string &s) { return FromTensor(p.Get(pre + s)); };
    Mat hn = RowNorm(h, P("ln_input.gain"), P("ln_input.bias"));
    Mat q = Mul(hn, P("attn.wq")), k = Mul(h, P("attn.wk")), v = Mul(h, P("attn.wv"));
    Mat heads(n, d);
    for (std::size_t hd = 0; hd < cfg.num_heads; ++hd) {
      for (std::size_t a = 0; a < n; ++a) {
        std::vector<double> s(n, -INFINITY);
        double mx = -INFINITY;
        for (std::size_t b = 0; b < n; ++b) {
          if (!allowed(a, b)) continue;
          double dot = 0.0;
          for (std::size_t j = hd * dh; j < (hd + 1) * dh; ++j) dot += q(a, j) * k(b, j);
          s[b] = dot / std::sqrt(static_cast<double>(dh));
          mx = std::max(mx, s[b]);
        }
        double z = 0.0;
        for (std::size_t b = 0; b < n; ++b) z += std::isinf(s[b]) ? 0.0 : std::exp(s[b] - mx);
        for (std::size_t b = 0; b < n; ++b) {
          if (std::isinf(s[b])) continue;
          const double w = std::exp(s[b] - mx) / z;
          for (std::size_t j = hd * dh; j < (hd + 1) * dh; ++j) heads(a, j) += w * v(b, j);
        }
      }
    }
    Mat zres = Mul(heads, P("attn.wo"));
    for (std::size_t e = 0; e < zres.v.size(); ++e) zres.v[e] += h.v[e];
    Mat f = Mul(RowNorm(zres, P("ln_ffn.gain"), P("ln_ffn.bias")), P("ffn.w1"));
    AddRowVector(f, P("ffn.b1"));
    for (double &e : f.v) e = std::max(e, 0.0);
    f = Mul(f, P("ffn.w2"));
    AddRowVector(f, P("ffn.b2"));
    for (std::size_t e = 0; e < f.v.size(); ++e) f.v[e] += zres.v[e];
    h = RowNorm(f, P("ln_output.gain"), P("ln_output.bias"));
  }
  Mat centers(T, d);
  std::copy(h.v.begin(), h.v.begin() + T * d, centers.v.begin());
  Mat y = Mul(centers, FromTensor(p.Get("encoder.output.weight")));
  AddRowVector(y, FromTensor(p.Get("encoder.output.bias")));
  return y;
}

inline EmformerConfig SmallConfig(std::size_t layers, std::size_t seg) {
  EmformerConfig cfg;
  cfg.input_dim = 6;
  cfg.num_layers = layers;
  cfg.model_dim = 8;
  cfg.num_heads = 2;
  cfg.ffn_dim = 12;
  cfg.output_dim = 5;
  cfg.segment_length = seg;
  return cfg;
}

inline ModelParams MakeParams(const EmformerConfig &cfg, std::uint64_t seed) {
  ModelParams p;
  RngStream rng(seed);
  InitEncoderParams(p, cfg, rng);
  // Non-trivial norm affine terms so the oracle exercises them.
  for (auto &param : p.params()) {
    if (param.value.dim() == 1)
      for (double &v : param.value.data()) v += 0.1 * rng.Normal();
  }
  return p;
}

}  // namespace nrt::testing

#endif  // NRT_TESTS_ORACLES_H_
