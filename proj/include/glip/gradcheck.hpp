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

#ifndef GLIP_GRADCHECK_HPP_
#define GLIP_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "glip/tensor.hpp"

namespace glip {

struct GradcheckOptions {
  double epsilon = 1e-3;
  // Coordinates probed per input tensor; 0 probes every element.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
  // Coordinates whose error exceeds retry_above are re-probed at these step
  // sizes and keep the best agreement. Piecewise-linear activations whose
  // kink lies within +-epsilon of the probe otherwise report spurious
  // mismatches; an incorrect gradient disagrees at every step size.
  std::vector<double> retry_epsilons;
  double retry_above = 0.0;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::size_t coords = 0;
  std::size_t retried = 0;  // coordinates that needed a retry step size
  std::string worst;  // "input[i][k]: analytic=.. numeric=.."
};

// |analytic - numeric| / max(1e-6, |analytic| + |numeric|)
double relative_error(double analytic, double numeric);

// Compares reverse-mode gradients of a random-weighted sum of fn() against
// central differences, with respect to each leaf tensor in `wrt`. fn reads
// the leaves through shared handles, so probes mutate them in place and
// restore them afterwards.
template <typename Scalar>
GradcheckReport gradcheck(const std::function<Tensor<Scalar>()>& fn,
                          std::vector<Tensor<Scalar>> wrt,
                          const GradcheckOptions& options = {});

}  // namespace glip

#endif  // GLIP_GRADCHECK_HPP_
