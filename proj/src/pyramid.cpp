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


#include "glip/pyramid.hpp"

#include <string>
#include <vector>

namespace glip {

namespace {

constexpr int kWorkingScale = 8;

// Nearest resampling between integer-ratio resolutions.
template <typename Scalar>
Tensor<Scalar> resample_nearest(const Tensor<Scalar>& x, int h, int w) {
  if (x.h() == h && x.w() == w) return x;
  if (x.h() > h) {
    if (x.h() % h != 0 || x.w() % w != 0 || x.h() / h != x.w() / w) {
      throw ShapeError("resample_nearest: non-integer ratio from " +
                       x.dims().str());
    }
    return downsample_nearest(x, x.h() / h);
  }
  if (h % x.h() != 0 || w % x.w() != 0 || h / x.h() != w / x.w()) {
    throw ShapeError("resample_nearest: non-integer ratio from " +
                     x.dims().str());
  }
  return upsample_nearest(x, h / x.h());
}

}  // namespace

template <typename Scalar>
Tensor<Scalar> gaussian_level(const Tensor<Scalar>& image) {
  const int pad_h = image.h() % 2;
  const int pad_w = image.w() % 2;
  const Tensor<Scalar> even =
      (pad_h || pad_w) ? reflect_pad(image, 0, pad_h, 0, pad_w) : image;
  return downsample_nearest(gaussian_blur3(even), 2);
}

template <typename Scalar>
Tensor<Scalar> laplacian_level(const Tensor<Scalar>& image,
                               const Tensor<Scalar>& g) {
  if (g.n() != image.n() || g.c() != image.c() ||
      g.h() != (image.h() + 1) / 2 || g.w() != (image.w() + 1) / 2) {
    throw ShapeError("laplacian_level: " + g.dims().str() +
                     " is not the Gaussian level of " + image.dims().str());
  }
  Tensor<Scalar> up = upsample_nearest(g, 2);
  if (up.h() != image.h() || up.w() != image.w()) {
    up = crop(up, 0, 0, image.h(), image.w());
  }
  return sub(image, up);
}

template <typename Scalar>
GLEWeights<Scalar> make_gle_weights(int channels, std::mt19937_64& rng) {
  return {make_conv<Scalar>(channels, 2 * channels, 7, 2, 3, rng),
          make_conv<Scalar>(2 * channels, channels, 7, 1, 3, rng)};
}

template <typename Scalar>
GLEOutput<Scalar> gle_forward(const Tensor<Scalar>& prev,
                              const GLEWeights<Scalar>& w, bool laplacian) {
  if (w.conv_up.out_channels() != w.conv_gs.in_channels() ||
      w.conv_up.in_channels() != w.conv_gs.out_channels()) {
    throw ShapeError("gle_forward: conv_up does not invert conv_gs channels");
  }
  if (!laplacian) {
    Tensor<Scalar> next = conv2d(prev, w.conv_gs);
    return {conv2d(next, w.conv_up), next};
  }
  Tensor<Scalar> next = gaussian_blur3(conv2d(prev, w.conv_gs));
  Tensor<Scalar> back = conv2d(upsample_nearest(next, 2), w.conv_up);
  if (!(back.dims() == prev.dims())) {
    throw ShapeError("gle_forward: reconstruction " + back.dims().str() +
                     " cannot be subtracted from " + prev.dims().str());
  }
  return {sub(prev, back), next};
}

template <typename Scalar>
PyramidWeights<Scalar> make_pyramid_weights(int stem_channels,
                                            std::mt19937_64& rng) {
  PyramidWeights<Scalar> w;
  w.stem = make_conv<Scalar>(7, stem_channels, 3, 1, 1, rng);
  int c = stem_channels;
  for (auto& m : w.modules) {
    m = make_gle_weights<Scalar>(c, rng);
    c *= 2;
  }
  return w;
}

template <typename Scalar>
FeaturePyramid<Scalar> extract_pyramid(const Tensor<Scalar>& image,
                                       const Tensor<Scalar>& structure,
                                       const MaskPlane& mask,
                                       const PyramidWeights<Scalar>& w,
                                       bool laplacian) {
  if (!(image.dims() == structure.dims())) {
    throw ShapeError("extract_pyramid: image " + image.dims().str() +
                     " vs structure " + structure.dims().str());
  }
  if (mask.batch() != image.n() || mask.height() != image.h() ||
      mask.width() != image.w()) {
    throw ShapeError("extract_pyramid: mask dims differ from image " +
                     image.dims().str());
  }
  if (image.h() % 32 != 0 || image.w() % 32 != 0) {
    throw ShapeError("extract_pyramid: spatial dims must be multiples of 32, got " +
                     image.dims().str());
  }
  const Tensor<Scalar> m3 = mask.expand<Scalar>(image.c());
  const std::vector<Tensor<Scalar>> inputs{mul(image, m3), mul(structure, m3),
                                           mask.expand<Scalar>(1)};
  FeaturePyramid<Scalar> p;
  Tensor<Scalar> stream =
      relu(conv2d(concat_channels<Scalar>(inputs), w.stem));
  for (int i = 0; i < kGleModules; ++i) {
    GLEOutput<Scalar> o = gle_forward(stream, w.modules[i], laplacian);
    p.levels[i] = std::move(o.residual);
    stream = std::move(o.next);
  }
  p.levels[kGleModules] = stream;
  p.input_mask = mask;
  for (int i = 0; i < kPyramidLevels; ++i) {
    p.level_masks[i] = mask.downsample_nearest(mask.height() / p.levels[i].h());
  }
  return p;
}

template <typename Scalar>
ProjectionWeights<Scalar> make_projection_weights(int stem_channels,
                                                  int proj_channels,
                                                  std::mt19937_64& rng) {
  ProjectionWeights<Scalar> w;
  int c = stem_channels;
  for (int i = 0; i < kPyramidLevels; ++i) {
    w[i] = make_conv<Scalar>(c, proj_channels, 1, 1, 0, rng);
    c *= 2;
  }
  return w;
}

template <typename Scalar>
SplitFeatures<Scalar> split_pyramid(const FeaturePyramid<Scalar>& p,
                                    const ProjectionWeights<Scalar>& proj) {
  const MaskPlane& full = p.input_mask;
  const int scale = kWorkingScale;
  if (full.height() % scale != 0 || full.width() % scale != 0) {
    throw ShapeError("split_pyramid: resolution not divisible by working scale");
  }
  const int h = full.height() / scale;
  const int w = full.width() / scale;
  std::vector<Tensor<Scalar>> low;
  std::vector<Tensor<Scalar>> high;
  for (int i = 0; i < kPyramidLevels; ++i) {
    const Tensor<Scalar>& f = p.levels[i];
    // Project at whichever resolution is smaller; 1x1 conv commutes with
    // nearest resampling.
    Tensor<Scalar> g = f.h() > h ? conv2d(resample_nearest(f, h, w), proj[i])
                                 : resample_nearest(conv2d(f, proj[i]), h, w);
    (i < 3 ? low : high).push_back(std::move(g));
  }
  return {concat_channels<Scalar>(low), concat_channels<Scalar>(high),
          full.downsample_nearest(scale)};
}

#define GLIP_INSTANTIATE_PYRAMID(S)                                            \
  template Tensor<S> gaussian_level(const Tensor<S>&);                         \
  template Tensor<S> laplacian_level(const Tensor<S>&, const Tensor<S>&);      \
  template GLEWeights<S> make_gle_weights(int, std::mt19937_64&);              \
  template GLEOutput<S> gle_forward(const Tensor<S>&, const GLEWeights<S>&,    \
                                    bool);                                     \
  template PyramidWeights<S> make_pyramid_weights(int, std::mt19937_64&);      \
  template FeaturePyramid<S> extract_pyramid(const Tensor<S>&,                 \
                                             const Tensor<S>&,                 \
                                             const MaskPlane&,                 \
                                             const PyramidWeights<S>&, bool);  \
  template ProjectionWeights<S> make_projection_weights(int, int,              \
                                                        std::mt19937_64&);     \
  template SplitFeatures<S> split_pyramid(const FeaturePyramid<S>&,            \
                                          const ProjectionWeights<S>&);

GLIP_INSTANTIATE_PYRAMID(float)
GLIP_INSTANTIATE_PYRAMID(double)

}  // namespace glip
