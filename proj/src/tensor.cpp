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

#include "glip/tensor.hpp"

#include <sstream>
#include <utility>

namespace glip {

std::string Dims::str() const {
  std::ostringstream os;
  os << "(" << n << "," << c << "," << h << "," << w << ")";
  return os.str();
}

template <typename Scalar>
Tensor<Scalar>::Tensor(const Dims& dims)
    : impl_(std::make_shared<detail::TensorImpl<Scalar>>()) {
  if (!dims.valid()) throw ShapeError("negative tensor dims " + dims.str());
  impl_->dims = dims;
  impl_->values = Array::Zero(static_cast<Eigen::Index>(dims.size()));
}

template <typename Scalar>
Tensor<Scalar>::Tensor(const Dims& dims, Array values)
    : impl_(std::make_shared<detail::TensorImpl<Scalar>>()) {
  if (!dims.valid()) throw ShapeError("negative tensor dims " + dims.str());
  if (static_cast<std::size_t>(values.size()) != dims.size()) {
    throw ShapeError("tensor data length " + std::to_string(values.size()) +
                     " does not match dims " + dims.str());
  }
  impl_->dims = dims;
  impl_->values = std::move(values);
  check_finite(*this, "Tensor");
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::constant(const Dims& dims, Scalar value) {
  Tensor t(dims);
  t.impl_->values.setConstant(value);
  check_finite(t, "Tensor::constant");
  return t;
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::parameter(const Dims& dims, Array values) {
  Tensor t(dims, std::move(values));
  t.set_requires_grad(true);
  return t;
}

template <typename Scalar>
Scalar Tensor<Scalar>::item() const {
  if (size() != 1) {
    throw ShapeError("item() on non-scalar tensor " + dims().str());
  }
  return impl_->values[0];
}

template <typename Scalar>
void Tensor<Scalar>::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  if (on) {
    if (impl_->grad.size() != impl_->values.size()) {
      impl_->grad = Array::Zero(impl_->values.size());
    }
  } else {
    impl_->grad.resize(0);
  }
}

template <typename Scalar>
void Tensor<Scalar>::zero_grad() {
  if (impl_->requires_grad) impl_->grad.setZero();
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::clone() const {
  return Tensor(dims(), values());
}

template <typename Scalar>
void check_finite(const Tensor<Scalar>& t, const char* where) {
  if (!t.values().allFinite()) {
    throw NumericError(std::string(where) + ": non-finite value in output " +
                       t.dims().str());
  }
}

template <typename Scalar>
void Tape<Scalar>::validate_input(const Tensor<Scalar>& in) const {
  if (!in.defined() || !in.requires_grad()) return;
  const auto& impl = *in.impl_;
  if (impl.tape == nullptr) return;
  if (impl.tape != this || impl.tape_index >= entries_.size()) {
    throw TapeError("op input was not produced earlier on this tape");
  }
}

template <typename Scalar>
void Tape<Scalar>::append(Tensor<Scalar>& output, BackwardFn backward) {
  output.impl_->tape = this;
  output.impl_->tape_index = entries_.size();
  output.set_requires_grad(true);
  entries_.push_back(std::move(backward));
}

template <typename Scalar>
void Tape<Scalar>::record(std::initializer_list<const Tensor<Scalar>*> inputs,
                          Tensor<Scalar>& output, BackwardFn backward) {
  if (consumed_) {
    throw TapeError("cannot record onto a consumed tape; call reset()");
  }
  for (const Tensor<Scalar>* in : inputs) {
    if (in != nullptr) validate_input(*in);
  }
  append(output, std::move(backward));
}

template <typename Scalar>
void Tape<Scalar>::record(const std::vector<Tensor<Scalar>>& inputs,
                          Tensor<Scalar>& output, BackwardFn backward) {
  if (consumed_) {
    throw TapeError("cannot record onto a consumed tape; call reset()");
  }
  for (const auto& in : inputs) validate_input(in);
  append(output, std::move(backward));
}

template <typename Scalar>
void Tape<Scalar>::backward(const Tensor<Scalar>& loss) {
  if (consumed_) {
    throw TapeError("backward already ran on this tape; re-record first");
  }
  if (!(loss.dims() == Dims{1, 1, 1, 1})) {
    throw ShapeError("backward needs a (1,1,1,1) loss, got " +
                     loss.dims().str());
  }
  if (!loss.requires_grad()) {
    throw TapeError("loss does not depend on any tensor requiring grad");
  }
  if (loss.impl_->tape != nullptr && loss.impl_->tape != this) {
    throw TapeError("loss was recorded on a different tape");
  }
  consumed_ = true;
  loss.impl_->grad[0] += Scalar(1);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
  // Closures hold the graph alive; drop it now that it has been consumed.
  entries_.clear();
}

template <typename Scalar>
void Tape<Scalar>::reset() {
  entries_.clear();
  consumed_ = false;
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template void check_finite(const Tensor<float>&, const char*);
template void check_finite(const Tensor<double>&, const char*);

}  // namespace glip
