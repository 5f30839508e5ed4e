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


#ifndef GLIP_PYRAMID_HPP_
#define GLIP_PYRAMID_HPP_

#include <array>
#include <random>

#include "glip/mask.hpp"
#include "glip/ops.hpp"

namespace glip {

inline constexpr int kPyramidLevels = 6;
inline constexpr int kGleModules = 5;

// Blur then keep even rows/cols. Odd sides are reflect-padded by one
// row/column (bottom/right) first, so the result is ceil(h/2) x ceil(w/2).
template <typename Scalar>
Tensor<Scalar> gaussian_level(const Tensor<Scalar>& image);

// image - upsample_nearest(g, 2), cropped to the image extent. Adding the
// upsampled g back reproduces the image.
template <typename Scalar>
Tensor<Scalar> laplacian_level(const Tensor<Scalar>& image,
                               const Tensor<Scalar>& g);

template <typename Scalar>
struct GLEWeights {
  ConvSpec<Scalar> conv_gs;  // c -> 2c, 7x7, stride 2, pad 3
  ConvSpec<Scalar> conv_up;  // 2c -> c, 7x7, stride 1, pad 3
};

template <typename Scalar>
GLEWeights<Scalar> make_gle_weights(int channels, std::mt19937_64& rng);

template <typename Scalar>
struct GLEOutput {
  Tensor<Scalar> residual;  // F
  Tensor<Scalar> next;      // I_next
};

// One learned pyramid step:
//   next     = blur(conv_gs(prev))
//   residual = prev - conv_up(upsample_nearest(next, 2))
// With `laplacian` false the blur and the upsample/subtract are stripped:
// next = conv_gs(prev), residual = conv_up(next) at half resolution.
template <typename Scalar>
GLEOutput<Scalar> gle_forward(const Tensor<Scalar>& prev,
                              const GLEWeights<Scalar>& w,
                              bool laplacian = true);

template <typename Scalar>
struct PyramidWeights {
  ConvSpec<Scalar> stem;  // 7 -> c0, 3x3, stride 1, pad 1
  std::array<GLEWeights<Scalar>, kGleModules> modules;
};

template <typename Scalar>
PyramidWeights<Scalar> make_pyramid_weights(int stem_channels,
                                            std::mt19937_64& rng);

template <typename Scalar>
struct FeaturePyramid {
  std::array<Tensor<Scalar>, kPyramidLevels> levels;  // F1..F6
  std::array<MaskPlane, kPyramidLevels> level_masks;
  MaskPlane input_mask;  // at image resolution
};

// Stem (conv + ReLU over [image*M, structure*M, M]) followed by the five
// chained modules. F6 is the last module's downsampled stream.
template <typename Scalar>
FeaturePyramid<Scalar> extract_pyramid(const Tensor<Scalar>& image,
                                       const Tensor<Scalar>& structure,
                                       const MaskPlane& mask,
                                       const PyramidWeights<Scalar>& w,
                                       bool laplacian = true);

// 1x1 projections, one per level.
template <typename Scalar>
using ProjectionWeights = std::array<ConvSpec<Scalar>, kPyramidLevels>;

template <typename Scalar>
ProjectionWeights<Scalar> make_projection_weights(int stem_channels,
                                                  int proj_channels,
                                                  std::mt19937_64& rng);

template <typename Scalar>
struct SplitFeatures {
  Tensor<Scalar> low;   // projected F1..F3 at 1/8 of the image resolution
  Tensor<Scalar> high;  // projected F4..F6 at the same resolution
  MaskPlane mask;       // input mask nearest-downsampled to match
};

template <typename Scalar>
SplitFeatures<Scalar> split_pyramid(const FeaturePyramid<Scalar>& p,
                                    const ProjectionWeights<Scalar>& proj);

}  // namespace glip

#endif  // GLIP_PYRAMID_HPP_
