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

#ifndef GLIP_T4F_HPP_
#define GLIP_T4F_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "glip/tensor.hpp"

// Raw tensor blocks: "T4F1", four u32 dims (n, c, h, w), then n*c*h*w
// IEEE-754 binary32 values, row-major. All fields little-endian.
namespace glip {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace le {
void put_u16(std::ostream& os, std::uint16_t v);
void put_u32(std::ostream& os, std::uint32_t v);
void put_f32(std::ostream& os, float v);
std::uint16_t get_u16(std::istream& is);
std::uint32_t get_u32(std::istream& is);
float get_f32(std::istream& is);
}  // namespace le

void write_t4f(std::ostream& os, const Tensor<float>& t);
Tensor<float> read_t4f(std::istream& is);

void save_t4f(const std::filesystem::path& path, const Tensor<float>& t);
Tensor<float> load_t4f(const std::filesystem::path& path);

}  // namespace glip

#endif  // GLIP_T4F_HPP_
