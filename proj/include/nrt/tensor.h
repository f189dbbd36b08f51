// nrt/tensor.h

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

#ifndef NRT_TENSOR_H_
#define NRT_TENSOR_H_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nrt/error.h"
#include "nrt/rng.h"

namespace nrt {

using Shape = std::vector<std::size_t>;

std::string ShapeToString(const Shape &shape);
std::size_t NumElements(const Shape &shape);

struct TensorStorage {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a backward pass touches it
  bool requires_grad = false;
};

// Dense row-major array of doubles with an optional gradient buffer.
// Tensor is a cheap handle: copies share storage. Use Clone() for a deep
// copy. Ops never mutate their inputs; parameters are mutated only by the
// optimizer, the noise injector and the pruning masks, all outside a tape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor Zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor Full(Shape shape, double value);
  static Tensor Identity(std::size_t n);
  static Tensor Scalar(double v) { return Tensor({1}, std::vector<double>{v}); }
  // Rows of equal length.
  static Tensor FromRows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor RandomNormal(Shape shape, RngStream &rng, double stddev = 1.0);

  bool defined() const { return storage_ != nullptr; }
  const Shape &shape() const { return storage_->shape; }
  std::size_t dim() const { return storage_->shape.size(); }
  std::size_t size(std::size_t axis) const { return storage_->shape.at(axis); }
  std::size_t numel() const { return storage_->data.size(); }
  // Matrix view: last axis is columns, everything before it is rows.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return storage_->data; }
  std::span<const double> data() const { return storage_->data; }
  std::vector<double> &vec() { return storage_->data; }
  const std::vector<double> &vec() const { return storage_->data; }

  double &at(std::size_t r, std::size_t c) { return storage_->data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const {
    return storage_->data[r * cols() + c];
  }
  double item() const;

  bool requires_grad() const { return storage_->requires_grad; }
  void set_requires_grad(bool v) { storage_->requires_grad = v; }
  bool has_grad() const { return !storage_->grad.empty(); }
  std::span<double> grad();
  std::span<const double> grad() const { return storage_->grad; }
  void ZeroGrad();
  void ClearGrad() { storage_->grad.clear(); }

  Tensor Clone() const;
  bool SharesStorage(const Tensor &o) const { return storage_ == o.storage_; }
  const std::shared_ptr<TensorStorage> &storage() const { return storage_; }

 private:
  std::shared_ptr<TensorStorage> storage_;
};

// Ordered record of differentiable ops. Entries are appended in execution
// order, which is a topological order, so Backward() replays them in reverse.
// A tape becomes active on the current thread through Tape::Scope; ops run
// with no active tape (or with no grad-requiring input) are not recorded.
class Tape {
 public:
  struct Entry {
    std::string op;
    std::vector<std::shared_ptr<TensorStorage>> inputs;
    std::shared_ptr<TensorStorage> output;
    std::function<void()> backward;
  };

  class Scope {
   public:
    explicit Scope(Tape &tape);
    ~Scope();
    Scope(const Scope &) = delete;
    Scope &operator=(const Scope &) = delete;

   private:
    Tape *previous_;
  };

  // Suspends recording on this thread.
  class NoGrad {
   public:
    NoGrad();
    ~NoGrad();
    NoGrad(const NoGrad &) = delete;
    NoGrad &operator=(const NoGrad &) = delete;

   private:
    Tape *previous_;
  };

  static Tape *Active();

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry> &entries() const { return entries_; }

  // Seeds d(root)/d(root) = seed (root must be a scalar) and runs every
  // recorded backward closure once, newest first. Clears the tape.
  void Backward(const Tensor &root, double seed = 1.0);
  // Optional hook invoked with each entry index as it is replayed.
  void set_visit_hook(std::function<void(std::size_t)> hook) {
    visit_hook_ = std::move(hook);
  }
  void Clear() { entries_.clear(); }

  void Record(Entry entry) { entries_.push_back(std::move(entry)); }

 private:
  std::vector<Entry> entries_;
  std::function<void(std::size_t)> visit_hook_;
};

// Builds the output tensor of a custom op and records it on the active tape
// when any input needs a gradient. `backward` receives the output storage
// (grad already populated) and must accumulate into the inputs it cares
// about through GradBuffer().
Tensor RecordOp(const std::string &name, Tensor output,
                std::initializer_list<Tensor> inputs,
                std::function<void(const TensorStorage &out)> backward);
Tensor RecordOp(const std::string &name, Tensor output,
                const std::vector<Tensor> &inputs,
                std::function<void(const TensorStorage &out)> backward);

// Returns the gradient buffer of `s`, allocating zeros on first use, or an
// empty span when `s` does not require a gradient.
std::span<double> GradBuffer(TensorStorage &s);

// ---------------------------------------------------------------------------
// Primitive ops.

Tensor MatMul(const Tensor &a, const Tensor &b);
// a * b^T without materialising the transpose.
Tensor MatMulNT(const Tensor &a, const Tensor &b);
Tensor Transpose(const Tensor &a);

Tensor Add(const Tensor &a, const Tensor &b);
Tensor Sub(const Tensor &a, const Tensor &b);
Tensor Mul(const Tensor &a, const Tensor &b);
Tensor Scale(const Tensor &a, double c);
// x[r, :] + bias for every row r.
Tensor AddBias(const Tensor &x, const Tensor &bias);
// out[i * b.rows() + j, :] = a[i, :] + b[j, :]
Tensor OuterAddRows(const Tensor &a, const Tensor &b);

Tensor Sigmoid(const Tensor &x);
Tensor Tanh(const Tensor &x);
Tensor Relu(const Tensor &x);

// Inverted dropout. Identity (same handle, no RNG draws) when !training or
// p == 0.
Tensor Dropout(const Tensor &x, double p, RngStream *rng, bool training);

inline constexpr double kLayerNormEps = 1e-5;
Tensor LayerNorm(const Tensor &x, const Tensor &gain, const Tensor &bias,
                 double eps = kLayerNormEps);

Tensor Softmax(const Tensor &x);
Tensor LogSoftmax(const Tensor &x);

Tensor Sum(const Tensor &x);
// Sum of squares, i.e. ||x||_2^2.
Tensor SquaredNorm(const Tensor &x);

Tensor ConcatRows(const std::vector<Tensor> &parts);
Tensor SliceRows(const Tensor &x, std::size_t begin, std::size_t end);
Tensor ConcatCols(const std::vector<Tensor> &parts);
Tensor SliceCols(const Tensor &x, std::size_t begin, std::size_t end);
Tensor GatherRows(const Tensor &table, std::span<const int> ids);
Tensor Reshape(const Tensor &x, Shape shape);

// x @ w + b for rows of x (w is d_in x d_out).
Tensor Linear(const Tensor &x, const Tensor &w, const Tensor &b);
Tensor Linear(const Tensor &x, const Tensor &w);

}  // namespace nrt

#endif  // NRT_TENSOR_H_
