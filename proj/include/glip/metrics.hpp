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


#ifndef GLIP_METRICS_HPP_
#define GLIP_METRICS_HPP_

#include "glip/tensor.hpp"

namespace glip {

// 10 log10(peak^2 / MSE); +infinity for identical inputs.
double psnr(const Tensor<float>& a, const Tensor<float>& b, double peak = 1.0);

// Mean SSIM over all valid 11x11 Gaussian (sigma 1.5) window positions,
// channels and samples, with K1 = 0.01, K2 = 0.03 and dynamic range 1.
// Both sides must be at least 11 pixels.
double ssim(const Tensor<float>& a, const Tensor<float>& b);

double mean_l1(const Tensor<float>& a, const Tensor<float>& b);

}  // namespace glip

#endif  // GLIP_METRICS_HPP_
