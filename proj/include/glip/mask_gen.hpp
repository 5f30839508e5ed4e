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


#ifndef GLIP_MASK_GEN_HPP_
#define GLIP_MASK_GEN_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "glip/mask.hpp"

namespace glip {

// Hole-fraction class (lo, hi], e.g. "10-20" -> (0.1, 0.2]. The lowest class
// still requires at least one hole pixel.
struct RatioClass {
  int lo_percent = 0;
  int hi_percent = 10;

  double lo() const { return lo_percent / 100.0; }
  double hi() const { return hi_percent / 100.0; }
  bool contains(double fraction) const {
    return fraction > lo() && fraction <= hi();
  }
  std::string str() const;

  // Accepts "a-b" with 0 <= a < b <= 100.
  static RatioClass parse(const std::string& text);
  friend bool operator==(const RatioClass&, const RatioClass&) = default;
};

// Comma-separated list of classes, e.g. "10-20,30-40".
std::vector<RatioClass> parse_ratio_classes(const std::string& text);

struct MaskSpec {
  RatioClass ratio;
  bool with_border = false;  // holes kept >= kBorderMargin px from edges
  std::uint64_t seed = 0;
};

inline constexpr int kBorderMargin = 8;

// Decorrelated 64-bit seed for item `b` of stream `a` under `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

class MaskGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Free-form brush strokes: 3-12 random walks with a round brush 4-24 px
// wide, stopped once the sampled target fraction is reached. Attempts that
// land outside the class are redrawn, up to 100 times. Deterministic in the
// spec's seed.
MaskPlane generate_mask(const MaskSpec& spec, int height, int width);

}  // namespace glip

#endif  // GLIP_MASK_GEN_HPP_
