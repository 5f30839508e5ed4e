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


#ifndef GLIP_LOSSES_HPP_
#define GLIP_LOSSES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "glip/mask.hpp"
#include "glip/ops.hpp"

namespace glip {

// Fixed feature stages, each conv -> ReLU -> 2x2 max pool. Never trained by
// the inpainting optimizer.
template <typename Scalar>
class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  explicit FeatureExtractor(std::vector<ConvSpec<Scalar>> stages);

  // Three stages, 3 -> 16 -> 32 -> 64 channels, He-normal weights from `seed`.
  static FeatureExtractor make_default(std::uint64_t seed = kDefaultSeed);
  // Stages "stage.<i>.weight" / "stage.<i>.bias" from a checkpoint file.
  static FeatureExtractor load(const std::string& path);

  // Outputs of every stage after pooling.
  std::vector<Tensor<Scalar>> features(const Tensor<Scalar>& image) const;

  const std::vector<ConvSpec<Scalar>>& stages() const { return stages_; }

  template <typename Other>
  FeatureExtractor<Other> cast() const;

  static constexpr std::uint64_t kDefaultSeed = 0x5eed'f00d;

 private:
  std::vector<ConvSpec<Scalar>> stages_;
};

struct LossWeights {
  double valid = 1.0;
  double hole = 6.0;
  double perceptual = 0.05;
  double style = 120.0;
  double tv = 0.1;
};

// Sum over stages of the mean absolute feature difference.
template <typename Scalar>
Tensor<Scalar> perceptual_loss(const Tensor<Scalar>& output,
                               const Tensor<Scalar>& target,
                               const FeatureExtractor<Scalar>& fx);

// Sum over stages of (1/C^2) * sum|G(target) - G(output)| with
// G = phi phi^T / (H W C), averaged over the batch.
template <typename Scalar>
Tensor<Scalar> style_loss(const Tensor<Scalar>& output,
                          const Tensor<Scalar>& target,
                          const FeatureExtractor<Scalar>& fx);

// Absolute horizontal and vertical neighbor differences over pairs whose
// two pixels both lie in `region`, summed and divided by the element count.
template <typename Scalar>
Tensor<Scalar> tv_loss(const Tensor<Scalar>& output, const MaskPlane& region);

// mean |(output - target) * M| over all elements.
template <typename Scalar>
Tensor<Scalar> valid_loss(const Tensor<Scalar>& output,
                          const Tensor<Scalar>& target, const MaskPlane& mask);
// mean |(output - target) * (1 - M)| over all elements.
template <typename Scalar>
Tensor<Scalar> hole_loss(const Tensor<Scalar>& output,
                         const Tensor<Scalar>& target, const MaskPlane& mask);

template <typename Scalar>
struct LossTerms {
  Tensor<Scalar> valid, hole, perceptual, style, tv;
};

template <typename Scalar>
Tensor<Scalar> composite_loss(const LossTerms<Scalar>& terms,
                              const LossWeights& lambda);

// Every term for one prediction; tv runs over the hole region dilated by one
// pixel.
template <typename Scalar>
LossTerms<Scalar> compute_losses(const Tensor<Scalar>& output,
                                 const Tensor<Scalar>& target,
                                 const MaskPlane& mask,
                                 const FeatureExtractor<Scalar>& fx);

}  // namespace glip

#endif  // GLIP_LOSSES_HPP_
