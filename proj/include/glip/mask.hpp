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

#ifndef GLIP_MASK_HPP_
#define GLIP_MASK_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "glip/tensor.hpp"

namespace glip {

// Binary validity map, 1 = valid/known, 0 = hole. Carries one plane per
// batch sample (batch() is 1 for a single image).
class MaskPlane {
 public:
  MaskPlane() = default;
  MaskPlane(int height, int width, bool valid = true)
      : MaskPlane(1, height, width, valid) {}
  MaskPlane(int batch, int height, int width, bool valid);

  // Binarizes an (n, 1, h, w) tensor: value > threshold is valid.
  template <typename Scalar>
  static MaskPlane from_tensor(const Tensor<Scalar>& t, double threshold = 0.5);

  int batch() const { return n_; }
  int height() const { return h_; }
  int width() const { return w_; }
  std::size_t size() const { return bits_.size(); }

  bool operator()(int y, int x) const { return at(0, y, x); }
  bool at(int b, int y, int x) const { return bits_[index(b, y, x)] != 0; }
  void set(int b, int y, int x, bool valid) {
    bits_[index(b, y, x)] = valid ? 1 : 0;
  }
  void set(int y, int x, bool valid) { set(0, y, x, valid); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::size_t valid_count() const;
  double hole_fraction() const;
  bool all_valid() const;
  bool all_holes() const;
  // True when every valid pixel of `other` is also valid here.
  bool covers(const MaskPlane& other) const;

  MaskPlane sample(int b) const;
  static MaskPlane stack(const std::vector<MaskPlane>& planes);

  // Keeps rows/cols whose index is a multiple of `factor`.
  MaskPlane downsample_nearest(int factor) const;
  MaskPlane upsample_nearest(int factor) const;
  // Grows the hole region by `radius` pixels (square structuring element).
  MaskPlane dilate_holes(int radius) const;
  MaskPlane inverted() const;

  // Channel-replicated 0/1 constant tensor (n, channels, h, w).
  template <typename Scalar>
  Tensor<Scalar> expand(int channels) const;

  friend bool operator==(const MaskPlane&, const MaskPlane&) = default;

 private:
  std::size_t index(int b, int y, int x) const {
    return (static_cast<std::size_t>(b) * h_ + y) * w_ + x;
  }

  int n_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Count of valid pixels under each window of the paired convolution.
std::vector<int> window_valid_counts(const MaskPlane& m, int kh, int kw,
                                     int stride, int padding, int* out_h,
                                     int* out_w);

// New validity after a partial convolution with this geometry: an output
// pixel is valid iff its receptive field held at least one valid pixel.
MaskPlane update_mask(const MaskPlane& m, int kh, int kw, int stride,
                      int padding);

}  // namespace glip

#endif  // GLIP_MASK_HPP_
