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


#ifndef GLIP_STRUCTURAL_HPP_
#define GLIP_STRUCTURAL_HPP_

#include "glip/tensor.hpp"

namespace glip {

inline constexpr int kStructureRounds = 4;
inline constexpr double kEdgeRange = 0.2;

// Edge-preserving smoothing used as the structure input. Each round blurs
// the image with the fixed 3x3 Gaussian; a pixel keeps its current value
// where its 3x3 per-channel range exceeds kEdgeRange and takes the blurred
// value elsewhere. Not differentiated.
Tensor<float> structural_map(const Tensor<float>& image,
                             int rounds = kStructureRounds);

}  // namespace glip

#endif  // GLIP_STRUCTURAL_HPP_
