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

#include "glip/t4f.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace glip {

namespace le {

namespace {

template <std::size_t N>
void put_bytes(std::ostream& os, std::uint64_t v) {
  std::array<char, N> bytes;
  for (std::size_t i = 0; i < N; ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  }
  os.write(bytes.data(), N);
}

template <std::size_t N>
std::uint64_t get_bytes(std::istream& is) {
  std::array<unsigned char, N> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), N)) {
    throw FormatError("unexpected end of stream");
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < N; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

}  // namespace

void put_u16(std::ostream& os, std::uint16_t v) { put_bytes<2>(os, v); }
void put_u32(std::ostream& os, std::uint32_t v) { put_bytes<4>(os, v); }
void put_f32(std::ostream& os, float v) {
  put_bytes<4>(os, std::bit_cast<std::uint32_t>(v));
}
std::uint16_t get_u16(std::istream& is) {
  return static_cast<std::uint16_t>(get_bytes<2>(is));
}
std::uint32_t get_u32(std::istream& is) {
  return static_cast<std::uint32_t>(get_bytes<4>(is));
}
float get_f32(std::istream& is) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(get_bytes<4>(is)));
}

}  // namespace le

namespace {
constexpr char kMagic[4] = {'T', '4', 'F', '1'};
}

void write_t4f(std::ostream& os, const Tensor<float>& t) {
  os.write(kMagic, 4);
  const Dims d = t.dims();
  for (int v : {d.n, d.c, d.h, d.w}) le::put_u32(os, static_cast<std::uint32_t>(v));
  for (Eigen::Index i = 0; i < t.values().size(); ++i) {
    le::put_f32(os, t.values()[i]);
  }
  if (!os) throw FormatError("T4F: write failed");
}

Tensor<float> read_t4f(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw FormatError("T4F: bad magic");
  }
  std::array<std::uint32_t, 4> raw{};
  for (auto& v : raw) v = le::get_u32(is);
  for (auto v : raw) {
    if (v > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
      throw FormatError("T4F: dimension out of range");
    }
  }
  const Dims d{static_cast<int>(raw[0]), static_cast<int>(raw[1]),
               static_cast<int>(raw[2]), static_cast<int>(raw[3])};
  Tensor<float>::Array values(static_cast<Eigen::Index>(d.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = le::get_f32(is);
  try {
    return Tensor<float>(d, std::move(values));
  } catch (const NumericError&) {
    throw FormatError("T4F: block contains non-finite values");
  }
}

void save_t4f(const std::filesystem::path& path, const Tensor<float>& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_t4f(os, t);
}

Tensor<float> load_t4f(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_t4f(is);
}

}  // namespace glip
