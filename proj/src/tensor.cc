// nrt/src/tensor.cc

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

#include "nrt/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nrt {

namespace {

thread_local Tape *g_active_tape = nullptr;

void RequireMatrix(const Tensor &t, const char *op) {
  if (!t.defined() || t.dim() != 2) {
    throw DimensionError(std::string(op) + ": expected a 2-D tensor, got " +
                         (t.defined() ? ShapeToString(t.shape()) : "<undefined>"));
  }
}

void RequireSameShape(const Tensor &a, const Tensor &b, const char *op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

void RequireFinite(const Tensor &x, const char *op) {
  for (double v : x.data()) {
    if (std::isnan(v)) {
      throw NumericError(std::string(op) + ": NaN in input of shape " +
                         ShapeToString(x.shape()));
    }
  }
}

template <typename F>
Tensor UnaryMap(const Tensor &x, F f) {
  Tensor out(x.shape());
  auto xd = x.data();
  auto od = out.data();
  for (std::size_t i = 0; i < xd.size(); ++i) od[i] = f(xd[i]);
  return out;
}

}  // namespace

std::string ShapeToString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t NumElements(const Shape &shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor(Shape shape, bool requires_grad)
    : storage_(std::make_shared<TensorStorage>()) {
  storage_->data.assign(NumElements(shape), 0.0);
  storage_->shape = std::move(shape);
  storage_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : storage_(std::make_shared<TensorStorage>()) {
  if (NumElements(shape) != data.size()) {
    throw DimensionError("Tensor: shape " + ShapeToString(shape) + " needs " +
                         std::to_string(NumElements(shape)) + " values, got " +
                         std::to_string(data.size()));
  }
  storage_->shape = std::move(shape);
  storage_->data = std::move(data);
  storage_->requires_grad = requires_grad;
}

Tensor Tensor::Full(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.vec().begin(), t.vec().end(), value);
  return t;
}

Tensor Tensor::Identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor Tensor::FromRows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto &row : rows) {
    if (row.size() != c) throw DimensionError("FromRows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::RandomNormal(Shape shape, RngStream &rng, double stddev) {
  Tensor t(std::move(shape));
  for (double &v : t.vec()) v = stddev * rng.Normal();
  return t;
}

std::size_t Tensor::cols() const {
  return storage_->shape.empty() ? 1 : storage_->shape.back();
}

std::size_t Tensor::rows() const {
  const std::size_t c = cols();
  return c == 0 ? 0 : numel() / c;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " + ShapeToString(shape()));
  }
  return storage_->data[0];
}

std::span<double> Tensor::grad() {
  if (storage_->grad.size() != storage_->data.size()) {
    storage_->grad.assign(storage_->data.size(), 0.0);
  }
  return storage_->grad;
}

void Tensor::ZeroGrad() {
  if (!storage_->grad.empty()) {
    std::fill(storage_->grad.begin(), storage_->grad.end(), 0.0);
  }
}

Tensor Tensor::Clone() const {
  Tensor t(storage_->shape, storage_->data, storage_->requires_grad);
  return t;
}

// ---------------------------------------------------------------------------
// Tape

Tape::Scope::Scope(Tape &tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}
Tape::Scope::~Scope() { g_active_tape = previous_; }

Tape::NoGrad::NoGrad() : previous_(g_active_tape) { g_active_tape = nullptr; }
Tape::NoGrad::~NoGrad() { g_active_tape = previous_; }

Tape *Tape::Active() { return g_active_tape; }

void Tape::Backward(const Tensor &root, double seed) {
  if (root.numel() != 1) {
    throw DimensionError("Backward: root must be a scalar, got " +
                         ShapeToString(root.shape()));
  }
  auto &rs = *root.storage();
  if (rs.requires_grad) {
    GradBuffer(rs)[0] += seed;
  }
  for (std::size_t i = entries_.size(); i-- > 0;) {
    if (visit_hook_) visit_hook_(i);
    auto &e = entries_[i];
    if (!e.output->grad.empty()) e.backward();
  }
  entries_.clear();
}

std::span<double> GradBuffer(TensorStorage &s) {
  if (!s.requires_grad) return {};
  if (s.grad.size() != s.data.size()) s.grad.assign(s.data.size(), 0.0);
  return s.grad;
}

Tensor RecordOp(const std::string &name, Tensor output,
                const std::vector<Tensor> &inputs,
                std::function<void(const TensorStorage &out)> backward) {
  Tape *tape = Tape::Active();
  if (tape == nullptr) return output;
  bool any = false;
  for (const auto &in : inputs) any = any || in.requires_grad();
  if (!any) return output;
  output.set_requires_grad(true);
  Tape::Entry entry;
  entry.op = name;
  for (const auto &in : inputs) entry.inputs.push_back(in.storage());
  entry.output = output.storage();
  TensorStorage *out_raw = output.storage().get();
  entry.backward = [out_raw, fn = std::move(backward)]() { fn(*out_raw); };
  tape->Record(std::move(entry));
  return output;
}

Tensor RecordOp(const std::string &name, Tensor output,
                std::initializer_list<Tensor> inputs,
                std::function<void(const TensorStorage &out)> backward) {
  return RecordOp(name, std::move(output), std::vector<Tensor>(inputs),
                  std::move(backward));
}

// ---------------------------------------------------------------------------
// Linear algebra

Tensor MatMul(const Tensor &a, const Tensor &b) {
  RequireMatrix(a, "MatMul");
  RequireMatrix(b, "MatMul");
  const std::size_t m = a.size(0), k = a.size(1), n = b.size(1);
  if (b.size(0) != k) {
    throw DimensionError("MatMul: inner dimensions disagree for " +
                         ShapeToString(a.shape()) + " and " +
                         ShapeToString(b.shape()));
  }
  Tensor out({m, n});
  {
    const double *A = a.data().data();
    const double *B = b.data().data();
    double *C = out.data().data();
    for (std::size_t i = 0; i < m; ++i) {
      double *crow = C + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = A[i * k + p];
        if (av == 0.0) continue;
        const double *brow = B + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
  auto as = a.storage(), bs = b.storage();
  return RecordOp("matmul", out, {a, b}, [as, bs, m, k, n](const TensorStorage &o) {
    const double *G = o.grad.data();
    if (auto ga = GradBuffer(*as); !ga.empty()) {
      // dA = G * B^T
      const double *B = bs->data.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double *brow = B + p * n;
          const double *grow = G + i * n;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (auto gb = GradBuffer(*bs); !gb.empty()) {
      // dB = A^T * G
      const double *A = as->data.data();
      for (std::size_t i = 0; i < m; ++i) {
        const double *grow = G + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          if (av == 0.0) continue;
          double *gbrow = gb.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
        }
      }
    }
  });
}

Tensor MatMulNT(const Tensor &a, const Tensor &b) {
  RequireMatrix(a, "MatMulNT");
  RequireMatrix(b, "MatMulNT");
  const std::size_t m = a.size(0), k = a.size(1), n = b.size(0);
  if (b.size(1) != k) {
    throw DimensionError("MatMulNT: inner dimensions disagree for " +
                         ShapeToString(a.shape()) + " and transposed " +
                         ShapeToString(b.shape()));
  }
  Tensor out({m, n});
  const double *A = a.data().data();
  const double *B = b.data().data();
  double *C = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += A[i * k + p] * B[j * k + p];
      C[i * n + j] = acc;
    }
  }
  auto as = a.storage(), bs = b.storage();
  return RecordOp("matmul_nt", out, {a, b}, [as, bs, m, k, n](const TensorStorage &o) {
    const double *G = o.grad.data();
    if (auto ga = GradBuffer(*as); !ga.empty()) {
      // dA = G * B
      const double *Bd = bs->data.data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double g = G[i * n + j];
          if (g == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) ga[i * k + p] += g * Bd[j * k + p];
        }
    }
    if (auto gb = GradBuffer(*bs); !gb.empty()) {
      // dB = G^T * A
      const double *Ad = as->data.data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double g = G[i * n + j];
          if (g == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) gb[j * k + p] += g * Ad[i * k + p];
        }
    }
  });
}

Tensor Transpose(const Tensor &a) {
  RequireMatrix(a, "Transpose");
  const std::size_t m = a.size(0), n = a.size(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
  auto as = a.storage();
  return RecordOp("transpose", out, {a}, [as, m, n](const TensorStorage &o) {
    auto ga = GradBuffer(*as);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += o.grad[j * m + i];
  });
}

// ---------------------------------------------------------------------------
// Elementwise

Tensor Add(const Tensor &a, const Tensor &b) {
  RequireSameShape(a, b, "Add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out.vec()[i] = a.vec()[i] + b.vec()[i];
  auto as = a.storage(), bs = b.storage();
  return RecordOp("add", out, {a, b}, [as, bs](const TensorStorage &o) {
    for (auto *s : {as.get(), bs.get()}) {
      auto g = GradBuffer(*s);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    }
  });
}

Tensor Sub(const Tensor &a, const Tensor &b) {
  RequireSameShape(a, b, "Sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out.vec()[i] = a.vec()[i] - b.vec()[i];
  auto as = a.storage(), bs = b.storage();
  return RecordOp("sub", out, {a, b}, [as, bs](const TensorStorage &o) {
    auto ga = GradBuffer(*as);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o.grad[i];
    auto gb = GradBuffer(*bs);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= o.grad[i];
  });
}

Tensor Mul(const Tensor &a, const Tensor &b) {
  RequireSameShape(a, b, "Mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out.vec()[i] = a.vec()[i] * b.vec()[i];
  auto as = a.storage(), bs = b.storage();
  return RecordOp("mul", out, {a, b}, [as, bs](const TensorStorage &o) {
    auto ga = GradBuffer(*as);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += o.grad[i] * bs->data[i];
    auto gb = GradBuffer(*bs);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += o.grad[i] * as->data[i];
  });
}

Tensor Scale(const Tensor &a, double c) {
  Tensor out = UnaryMap(a, [c](double v) { return c * v; });
  auto as = a.storage();
  return RecordOp("scale", out, {a}, [as, c](const TensorStorage &o) {
    auto ga = GradBuffer(*as);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += c * o.grad[i];
  });
}

Tensor AddBias(const Tensor &x, const Tensor &bias) {
  const std::size_t c = x.cols();
  if (bias.numel() != c) {
    throw DimensionError("AddBias: bias " + ShapeToString(bias.shape()) +
                         " does not match " + ShapeToString(x.shape()));
  }
  const std::size_t r = x.rows();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      out.vec()[i * c + j] = x.vec()[i * c + j] + bias.vec()[j];
  auto xs = x.storage(), bs = bias.storage();
  return RecordOp("add_bias", out, {x, bias}, [xs, bs, r, c](const TensorStorage &o) {
    auto gx = GradBuffer(*xs);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += o.grad[i];
    auto gb = GradBuffer(*bs);
    if (!gb.empty())
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gb[j] += o.grad[i * c + j];
  });
}

Tensor OuterAddRows(const Tensor &a, const Tensor &b) {
  RequireMatrix(a, "OuterAddRows");
  RequireMatrix(b, "OuterAddRows");
  if (a.size(1) != b.size(1)) {
    throw DimensionError("OuterAddRows: width mismatch " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
  const std::size_t ta = a.size(0), tb = b.size(0), c = a.size(1);
  Tensor out({ta * tb, c});
  for (std::size_t i = 0; i < ta; ++i)
    for (std::size_t j = 0; j < tb; ++j)
      for (std::size_t k = 0; k < c; ++k)
        out.vec()[(i * tb + j) * c + k] = a.vec()[i * c + k] + b.vec()[j * c + k];
  auto as = a.storage(), bs = b.storage();
  return RecordOp("outer_add_rows", out, {a, b}, [as, bs, ta, tb, c](const TensorStorage &o) {
    auto ga = GradBuffer(*as);
    auto gb = GradBuffer(*bs);
    for (std::size_t i = 0; i < ta; ++i)
      for (std::size_t j = 0; j < tb; ++j)
        for (std::size_t k = 0; k < c; ++k) {
          const double g = o.grad[(i * tb + j) * c + k];
          if (!ga.empty()) ga[i * c + k] += g;
          if (!gb.empty()) gb[j * c + k] += g;
        }
  });
}

Tensor Sigmoid(const Tensor &x) {
  Tensor out = UnaryMap(x, [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  auto xs = x.storage();
  return RecordOp("sigmoid", out, {x}, [xs](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = o.data[i];
      g[i] += o.grad[i] * s * (1.0 - s);
    }
  });
}

Tensor Tanh(const Tensor &x) {
  Tensor out = UnaryMap(x, [](double v) { return std::tanh(v); });
  auto xs = x.storage();
  return RecordOp("tanh", out, {x}, [xs](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = o.data[i];
      g[i] += o.grad[i] * (1.0 - t * t);
    }
  });
}

Tensor Relu(const Tensor &x) {
  Tensor out = UnaryMap(x, [](double v) { return v > 0 ? v : 0.0; });
  auto xs = x.storage();
  return RecordOp("relu", out, {x}, [xs](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xs->data[i] > 0) g[i] += o.grad[i];
  });
}

Tensor Dropout(const Tensor &x, double p, RngStream *rng, bool training) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("Dropout: probability must be in [0, 1), got " +
                      std::to_string(p));
  }
  if (!training || p == 0.0) return x;
  if (rng == nullptr) throw ConfigError("Dropout: training mode needs an RngStream");
  const double keep_scale = 1.0 / (1.0 - p);
  auto mask = std::make_shared<std::vector<double>>(x.numel());
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    (*mask)[i] = rng->Bernoulli(p) ? 0.0 : keep_scale;
    out.vec()[i] = x.vec()[i] * (*mask)[i];
  }
  auto xs = x.storage();
  return RecordOp("dropout", out, {x}, [xs, mask](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * (*mask)[i];
  });
}

// ---------------------------------------------------------------------------
// Normalisation

Tensor LayerNorm(const Tensor &x, const Tensor &gain, const Tensor &bias,
                 double eps) {
  const std::size_t d = x.cols();
  if (d == 0) throw DimensionError("LayerNorm: empty normalised dimension");
  if (gain.numel() != d || bias.numel() != d) {
    throw DimensionError("LayerNorm: gain/bias " + ShapeToString(gain.shape()) +
                         "/" + ShapeToString(bias.shape()) + " vs input " +
                         ShapeToString(x.shape()));
  }
  if (!(eps > 0)) throw ConfigError("LayerNorm: eps must be positive");
  const std::size_t r = x.rows();
  Tensor out(x.shape());
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto inv_std = std::make_shared<std::vector<double>>(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double *row = x.vec().data() + i * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mean) * is;
      (*xhat)[i * d + j] = h;
      out.vec()[i * d + j] = gain.vec()[j] * h + bias.vec()[j];
    }
  }
  auto xs = x.storage(), gs = gain.storage(), bs = bias.storage();
  return RecordOp("layer_norm", out, {x, gain, bias},
                  [xs, gs, bs, xhat, inv_std, r, d](const TensorStorage &o) {
    auto gx = GradBuffer(*xs);
    auto gg = GradBuffer(*gs);
    auto gb = GradBuffer(*bs);
    std::vector<double> dxhat(d);
    for (std::size_t i = 0; i < r; ++i) {
      const double *dy = o.grad.data() + i * d;
      const double *h = xhat->data() + i * d;
      double sum_dxhat = 0.0, sum_dxhat_h = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        if (!gg.empty()) gg[j] += dy[j] * h[j];
        if (!gb.empty()) gb[j] += dy[j];
        dxhat[j] = dy[j] * gs->data[j];
        sum_dxhat += dxhat[j];
        sum_dxhat_h += dxhat[j] * h[j];
      }
      if (gx.empty()) continue;
      const double scale = (*inv_std)[i] / static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j) {
        gx[i * d + j] += scale * (static_cast<double>(d) * dxhat[j] - sum_dxhat -
                                  h[j] * sum_dxhat_h);
      }
    }
  });
}

Tensor Softmax(const Tensor &x) {
  RequireFinite(x, "Softmax");
  const std::size_t c = x.cols(), r = x.rows();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < r; ++i) {
    const double *row = x.vec().data() + i * c;
    double *orow = out.vec().data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (orow[j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j) orow[j] /= z;
  }
  auto xs = x.storage();
  return RecordOp("softmax", out, {x}, [xs, r, c](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < r; ++i) {
      const double *s = o.data.data() + i * c;
      const double *dy = o.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += dy[j] * s[j];
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += s[j] * (dy[j] - dot);
    }
  });
}

Tensor LogSoftmax(const Tensor &x) {
  RequireFinite(x, "LogSoftmax");
  const std::size_t c = x.cols(), r = x.rows();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < r; ++i) {
    const double *row = x.vec().data() + i * c;
    double *orow = out.vec().data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) orow[j] = row[j] - lz;
  }
  auto xs = x.storage();
  return RecordOp("log_softmax", out, {x}, [xs, r, c](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < r; ++i) {
      const double *ls = o.data.data() + i * c;
      const double *dy = o.grad.data() + i * c;
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) sum += dy[j];
      for (std::size_t j = 0; j < c; ++j)
        g[i * c + j] += dy[j] - std::exp(ls[j]) * sum;
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions

Tensor Sum(const Tensor &x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  auto xs = x.storage();
  return RecordOp("sum", Tensor::Scalar(s), {x}, [xs](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (auto &v : g) v += o.grad[0];
  });
}

Tensor SquaredNorm(const Tensor &x) {
  double s = 0.0;
  for (double v : x.data()) s += v * v;
  auto xs = x.storage();
  return RecordOp("squared_norm", Tensor::Scalar(s), {x}, [xs](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * xs->data[i] * o.grad[0];
  });
}

// ---------------------------------------------------------------------------
// Structural

Tensor ConcatRows(const std::vector<Tensor> &parts) {
  if (parts.empty()) throw DimensionError("ConcatRows: no inputs");
  const std::size_t c = parts.front().cols();
  std::size_t r = 0;
  for (const auto &p : parts) {
    if (p.cols() != c) {
      throw DimensionError("ConcatRows: width mismatch " +
                           ShapeToString(parts.front().shape()) + " vs " +
                           ShapeToString(p.shape()));
    }
    r += p.rows();
  }
  Tensor out({r, c});
  std::vector<std::shared_ptr<TensorStorage>> stores;
  std::size_t off = 0;
  for (const auto &p : parts) {
    std::copy(p.vec().begin(), p.vec().end(), out.vec().begin() + off);
    off += p.numel();
    stores.push_back(p.storage());
  }
  return RecordOp("concat_rows", out, parts, [stores](const TensorStorage &o) {
    std::size_t off = 0;
    for (const auto &s : stores) {
      auto g = GradBuffer(*s);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[off + i];
      off += s->data.size();
    }
  });
}

Tensor SliceRows(const Tensor &x, std::size_t begin, std::size_t end) {
  const std::size_t c = x.cols();
  if (begin > end || end > x.rows()) {
    throw DimensionError("SliceRows: [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") out of range for " +
                         ShapeToString(x.shape()));
  }
  Tensor out({end - begin, c});
  std::copy(x.vec().begin() + begin * c, x.vec().begin() + end * c,
            out.vec().begin());
  auto xs = x.storage();
  return RecordOp("slice_rows", out, {x}, [xs, begin, c](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < o.grad.size(); ++i) g[begin * c + i] += o.grad[i];
  });
}

Tensor ConcatCols(const std::vector<Tensor> &parts) {
  if (parts.empty()) throw DimensionError("ConcatCols: no inputs");
  const std::size_t r = parts.front().rows();
  std::size_t c = 0;
  for (const auto &p : parts) {
    if (p.rows() != r) {
      throw DimensionError("ConcatCols: height mismatch " +
                           ShapeToString(parts.front().shape()) + " vs " +
                           ShapeToString(p.shape()));
    }
    c += p.cols();
  }
  Tensor out({r, c});
  std::vector<std::shared_ptr<TensorStorage>> stores;
  std::vector<std::size_t> widths;
  std::size_t off = 0;
  for (const auto &p : parts) {
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < r; ++i)
      std::copy(p.vec().begin() + i * w, p.vec().begin() + (i + 1) * w,
                out.vec().begin() + i * c + off);
    off += w;
    stores.push_back(p.storage());
    widths.push_back(w);
  }
  return RecordOp("concat_cols", out, parts, [stores, widths, r, c](const TensorStorage &o) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < stores.size(); ++k) {
      auto g = GradBuffer(*stores[k]);
      const std::size_t w = widths[k];
      if (!g.empty())
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < w; ++j) g[i * w + j] += o.grad[i * c + off + j];
      off += w;
    }
  });
}

Tensor SliceCols(const Tensor &x, std::size_t begin, std::size_t end) {
  RequireMatrix(x, "SliceCols");
  const std::size_t r = x.rows(), c = x.cols();
  if (begin > end || end > c) {
    throw DimensionError("SliceCols: [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") out of range for " +
                         ShapeToString(x.shape()));
  }
  const std::size_t w = end - begin;
  Tensor out({r, w});
  for (std::size_t i = 0; i < r; ++i)
    std::copy(x.vec().begin() + i * c + begin, x.vec().begin() + i * c + end,
              out.vec().begin() + i * w);
  auto xs = x.storage();
  return RecordOp("slice_cols", out, {x}, [xs, r, c, begin, w](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < w; ++j) g[i * c + begin + j] += o.grad[i * w + j];
  });
}

Tensor GatherRows(const Tensor &table, std::span<const int> ids) {
  RequireMatrix(table, "GatherRows");
  const std::size_t c = table.cols(), n = table.rows();
  Tensor out({ids.size(), c});
  std::vector<int> idv(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= n) {
      throw DimensionError("GatherRows: id " + std::to_string(ids[i]) +
                           " out of range for table " +
                           ShapeToString(table.shape()));
    }
    std::copy(table.vec().begin() + ids[i] * c,
              table.vec().begin() + (ids[i] + 1) * c, out.vec().begin() + i * c);
  }
  auto ts = table.storage();
  return RecordOp("gather_rows", out, {table}, [ts, idv, c](const TensorStorage &o) {
    auto g = GradBuffer(*ts);
    for (std::size_t i = 0; i < idv.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) g[idv[i] * c + j] += o.grad[i * c + j];
  });
}

Tensor Reshape(const Tensor &x, Shape shape) {
  if (NumElements(shape) != x.numel()) {
    throw DimensionError("Reshape: cannot view " + ShapeToString(x.shape()) +
                         " as " + ShapeToString(shape));
  }
  Tensor out(std::move(shape), x.vec());
  auto xs = x.storage();
  return RecordOp("reshape", out, {x}, [xs](const TensorStorage &o) {
    auto g = GradBuffer(*xs);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
  });
}

Tensor Linear(const Tensor &x, const Tensor &w, const Tensor &b) {
  return AddBias(MatMul(x, w), b);
}

Tensor Linear(const Tensor &x, const Tensor &w) { return MatMul(x, w); }

}  // namespace nrt
