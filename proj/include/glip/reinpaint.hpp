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


#ifndef GLIP_REINPAINT_HPP_
#define GLIP_REINPAINT_HPP_

#include <array>
#include <random>
#include <vector>

#include "glip/mask.hpp"
#include "glip/ops.hpp"
#include "glip/partial_conv.hpp"

namespace glip {

template <typename Scalar>
struct ReinpaintWeights {
  std::array<ConvSpec<Scalar>, 3> branch1;  // 3w -> w -> w -> w, 3x3
  std::array<ConvSpec<Scalar>, 3> branch2;  // 2w -> w -> w -> w, 3x3
};

template <typename Scalar>
ReinpaintWeights<Scalar> make_reinpaint_weights(int width, std::mt19937_64& rng);

// Enhances sub-volume tau (1-based) of F_int, whose sub-volumes are `width`
// channels each. For tau < T:
//   b1 = convs1([F(tau-1), F(tau), F(tau+1)]) * H(tau-1)
//   b2 = convs2([F(tau), F(tau+1)]) * (H(tau) - H(tau-1))
//   result = b1 + b2 + F(tau)
// F(0) is zeros. At tau == T the sub-volume passes through unchanged.
// mask_history holds H(0)..H(T).
template <typename Scalar>
Tensor<Scalar> reinpaint_step(const Tensor<Scalar>& f_int,
                              const std::vector<MaskPlane>& mask_history,
                              int tau, int width,
                              const ReinpaintWeights<Scalar>& w);

// Per-location mean of the T volumes weighted by H(1)..H(T); locations that
// were never filled take the last volume.
template <typename Scalar>
Tensor<Scalar> feature_merge(const std::vector<Tensor<Scalar>>& volumes,
                             const std::vector<MaskPlane>& mask_history);

struct ReconstructWidths {
  std::array<int, 3> up{128, 64, 32};

  friend bool operator==(const ReconstructWidths&, const ReconstructWidths&) = default;
};

template <typename Scalar>
struct ResidualBlock {
  ConvSpec<Scalar> conv1;
  BatchNormParams<Scalar> bn1;
  ConvSpec<Scalar> conv2;
  BatchNormParams<Scalar> bn2;
};

template <typename Scalar>
struct ReconstructWeights {
  std::array<PConvSpec<Scalar>, 3> up;  // after each x2 upsample
  std::array<BatchNormParams<Scalar>, 3> up_bn;
  std::array<ResidualBlock<Scalar>, 3> residual;
  std::array<ConvSpec<Scalar>, 3> head;  // c -> c/2 -> c/4 (3x3), -> 3 (1x1)
};

template <typename Scalar>
ReconstructWeights<Scalar> make_reconstruct_weights(int in_channels,
                                                    const ReconstructWidths& widths,
                                                    std::mt19937_64& rng);

// Three [x2 upsample -> partial conv -> BN -> leaky ReLU] blocks with the
// mask upsampled alongside, three residual blocks, the head convs and a
// sigmoid. Output is 8x the working resolution with 3 channels in (0, 1).
template <typename Scalar>
Tensor<Scalar> reconstruct(const Tensor<Scalar>& merged, const MaskPlane& mask,
                           const ReconstructWeights<Scalar>& w,
                           bool freeze_bn = false);

// mask * image + (1 - mask) * output.
template <typename Scalar>
Tensor<Scalar> composite(const Tensor<Scalar>& output,
                         const Tensor<Scalar>& image, const MaskPlane& mask);

}  // namespace glip

#endif  // GLIP_REINPAINT_HPP_
