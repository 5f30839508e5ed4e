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


#ifndef GLIP_IMAGE_IO_HPP_
#define GLIP_IMAGE_IO_HPP_

#include <filesystem>
#include <stdexcept>

#include "glip/mask.hpp"
#include "glip/tensor.hpp"

// 8-bit image files: PNG (by extension .png) or binary PPM/PGM (.ppm/.pgm).
// Values map to [0, 1] as v / 255 and back with rounding.
namespace glip {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// (1, 3, h, w). Grayscale files are replicated to three channels. With a
// positive `resolution` the image is bilinearly resized to it (square).
Tensor<float> load_image(const std::filesystem::path& path, int resolution = 0);
void save_image(const Tensor<float>& image, const std::filesystem::path& path);

// Gray levels >= 128 are valid. Color files are converted to luminance.
// With a positive `resolution`, nearest-neighbour resized.
MaskPlane load_mask(const std::filesystem::path& path, int resolution = 0);
// Valid pixels are written as 255, holes as 0.
void save_mask(const MaskPlane& mask, const std::filesystem::path& path);

// Bilinear resampling with half-pixel centers and edge clamping.
Tensor<float> resize_bilinear(const Tensor<float>& image, int height, int width);

}  // namespace glip

#endif  // GLIP_IMAGE_IO_HPP_
