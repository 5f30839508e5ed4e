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


#include "glip/adam.hpp"

#include <cmath>

namespace glip {

template <typename Scalar>
void adam_step(const NamedTensors<Scalar>& params, AdamState<Scalar>& state,
               double lr, const AdamOptions& options) {
  for (const auto& [name, p] : params) {
    if (!p.requires_grad()) {
      throw TapeError("adam_step: " + name + " has no gradient buffer");
    }
    if (!p.grad().allFinite()) {
      throw NumericError("adam_step: non-finite gradient in " + name);
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const Scalar b1 = static_cast<Scalar>(options.beta1);
  const Scalar b2 = static_cast<Scalar>(options.beta2);
  const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(options.beta1, t));
  const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(options.beta2, t));
  const Scalar rate = static_cast<Scalar>(lr);
  const Scalar eps = static_cast<Scalar>(options.epsilon);
  for (const auto& [name, p] : params) {
    auto [mi, new_m] = state.m.try_emplace(name, Tensor<Scalar>(p.dims()));
    auto [vi, new_v] = state.v.try_emplace(name, Tensor<Scalar>(p.dims()));
    if (!(mi->second.dims() == p.dims()) || !(vi->second.dims() == p.dims())) {
      throw ShapeError("adam_step: moment dims differ for " + name);
    }
    auto& m = mi->second.mutable_values();
    auto& v = vi->second.mutable_values();
    const auto& g = p.grad();
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.square();
    Tensor<Scalar> handle = p;
    handle.mutable_values() -= rate * (m / c1) / ((v / c2).sqrt() + eps);
  }
}

template <typename Scalar>
double grad_norm(const NamedTensors<Scalar>& params) {
  double sq = 0.0;
  for (const auto& [name, p] : params) {
    if (p.requires_grad()) {
      sq += p.grad().template cast<double>().square().sum();
    }
  }
  return std::sqrt(sq);
}

template <typename Scalar>
double clip_grad_norm(const NamedTensors<Scalar>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (std::isfinite(norm) && norm > max_norm) {
    const Scalar factor = static_cast<Scalar>(max_norm / norm);
    for (const auto& [name, p] : params) {
      if (p.requires_grad()) p.mutable_grad() *= factor;
    }
  }
  return norm;
}

template void adam_step(const NamedTensors<float>&, AdamState<float>&, double,
                        const AdamOptions&);
template void adam_step(const NamedTensors<double>&, AdamState<double>&,
                        double, const AdamOptions&);
template double grad_norm(const NamedTensors<float>&);
template double grad_norm(const NamedTensors<double>&);
template double clip_grad_norm(const NamedTensors<float>&, double);
template double clip_grad_norm(const NamedTensors<double>&, double);

}  // namespace glip
