/*
Copyright 2026 The glip Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef GLIP_TENSOR_HPP_
#define GLIP_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace glip {

// Raised when an operation would produce NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised on incompatible tensor shapes or invalid geometry.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised on misuse of the recording tape.
class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Dims {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool valid() const { return n >= 0 && c >= 0 && h >= 0 && w >= 0; }
  std::string str() const;

  friend bool operator==(const Dims&, const Dims&) = default;
};

template <typename Scalar>
class Tape;

namespace detail {

template <typename Scalar>
struct TensorImpl {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Dims dims;
  Array values;
  Array grad;  // same length as values iff requires_grad
  bool requires_grad = false;
  const void* tape = nullptr;  // producer tape; nullptr for leaves
  std::size_t tape_index = 0;
};

}  // namespace detail

// Dense rank-4 (n, c, h, w) array, row-major with w fastest.
//
// Tensor is a shared handle: copies alias the same storage, which is what the
// tape needs to route gradients back to parameters. Values are only mutated
// through recorded ops, or explicitly via mutable_values() on leaves (weight
// initialization, optimizer updates, finite-difference probes).
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Tensor() = default;
  explicit Tensor(const Dims& dims);
  Tensor(const Dims& dims, Array values);

  static Tensor zeros(const Dims& dims) { return Tensor(dims); }
  static Tensor constant(const Dims& dims, Scalar value);
  static Tensor scalar(Scalar value) { return constant({1, 1, 1, 1}, value); }
  // Leaf with requires_grad set.
  static Tensor parameter(const Dims& dims, Array values);

  bool defined() const { return impl_ != nullptr; }
  const Dims& dims() const { return impl_->dims; }
  int n() const { return impl_->dims.n; }
  int c() const { return impl_->dims.c; }
  int h() const { return impl_->dims.h; }
  int w() const { return impl_->dims.w; }
  std::size_t size() const { return impl_->values.size(); }

  const Array& values() const { return impl_->values; }
  Array& mutable_values() { return impl_->values; }
  const Scalar* data() const { return impl_->values.data(); }

  std::size_t offset(int n, int c, int y, int x) const {
    const Dims& d = impl_->dims;
    return ((static_cast<std::size_t>(n) * d.c + c) * d.h + y) * d.w + x;
  }
  Scalar operator()(int n, int c, int y, int x) const {
    return impl_->values[offset(n, c, y, x)];
  }
  Scalar item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool on);
  bool is_leaf() const { return impl_->tape == nullptr; }
  const Array& grad() const { return impl_->grad; }
  // Handle semantics: gradient buffers accumulate through any copy.
  Array& mutable_grad() const { return impl_->grad; }
  void zero_grad();

  // Deep copy of the values, detached from any tape.
  Tensor clone() const;

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(dims(), values().template cast<Other>());
  }

  bool same(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend class Tape<Scalar>;
  std::shared_ptr<detail::TensorImpl<Scalar>> impl_;
};

// Throws NumericError naming `where` if any value is NaN/Inf.
template <typename Scalar>
void check_finite(const Tensor<Scalar>& t, const char* where);

// Ordered record of differentiable operations.
//
// Ops record onto the tape made active by a TapeScope on the current thread,
// and only when at least one input requires a gradient. A tape supports one
// backward pass; reset() clears it for the next forward graph.
template <typename Scalar>
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers `output` as produced by an op over `inputs`. Marks the output
  // as requiring grad and allocates its gradient buffer.
  void record(std::initializer_list<const Tensor<Scalar>*> inputs,
              Tensor<Scalar>& output, BackwardFn backward);
  void record(const std::vector<Tensor<Scalar>>& inputs,
              Tensor<Scalar>& output, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and runs every recorded rule in reverse order.
  void backward(const Tensor<Scalar>& loss);

  std::size_t size() const { return entries_.size(); }
  bool consumed() const { return consumed_; }
  void reset();

  static Tape* active() { return active_; }

 private:
  template <typename>
  friend class TapeScope;

  void validate_input(const Tensor<Scalar>& in) const;
  void append(Tensor<Scalar>& output, BackwardFn backward);

  std::vector<BackwardFn> entries_;
  bool consumed_ = false;
  static thread_local Tape* active_;
};

// Makes a tape active for the lifetime of the scope.
template <typename Scalar>
class TapeScope {
 public:
  explicit TapeScope(Tape<Scalar>& tape) : previous_(Tape<Scalar>::active_) {
    Tape<Scalar>::active_ = &tape;
  }
  ~TapeScope() { Tape<Scalar>::active_ = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<Scalar>* previous_;
};

template <typename Scalar>
void backward(const Tensor<Scalar>& loss, Tape<Scalar>& tape) {
  tape.backward(loss);
}

template <typename Scalar>
thread_local Tape<Scalar>* Tape<Scalar>::active_ = nullptr;

namespace detail {

// Active tape when any of `inputs` needs a gradient, else nullptr.
template <typename Scalar>
Tape<Scalar>* recording_tape(
    std::initializer_list<const Tensor<Scalar>*> inputs) {
  Tape<Scalar>* tape = Tape<Scalar>::active();
  if (tape == nullptr) return nullptr;
  for (const Tensor<Scalar>* t : inputs) {
    if (t != nullptr && t->defined() && t->requires_grad()) return tape;
  }
  return nullptr;
}

}  // namespace detail

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace glip

#endif  // GLIP_TENSOR_HPP_
