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


#ifndef GLIP_ADAM_HPP_
#define GLIP_ADAM_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "glip/tensor.hpp"

namespace glip {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  std::int64_t step = 0;
  std::map<std::string, Tensor<Scalar>> m;  // first moments by name
  std::map<std::string, Tensor<Scalar>> v;  // second moments by name
};

template <typename Scalar>
using NamedTensors = std::vector<std::pair<std::string, Tensor<Scalar>>>;

// One bias-corrected Adam update of every tensor in `params` from its
// gradient. Throws NumericError, leaving params and state untouched, if any
// gradient is non-finite. Moments are created on first use.
template <typename Scalar>
void adam_step(const NamedTensors<Scalar>& params, AdamState<Scalar>& state,
               double lr, const AdamOptions& options = {});

// Global L2 norm of the gradients.
template <typename Scalar>
double grad_norm(const NamedTensors<Scalar>& params);

// Rescales gradients so their global norm is at most max_norm; returns the
// norm before clipping.
template <typename Scalar>
double clip_grad_norm(const NamedTensors<Scalar>& params, double max_norm);

}  // namespace glip

#endif  // GLIP_ADAM_HPP_
