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


#include "glip/mask_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace glip {

namespace {

constexpr int kMaxAttempts = 100;
constexpr int kMinStrokes = 3;
constexpr int kMaxStrokes = 12;
constexpr int kMinThickness = 4;
constexpr int kMaxThickness = 24;
constexpr int kMaxStampsPerStroke = 20000;

class Canvas {
 public:
  Canvas(int h, int w, int margin) : h_(h), w_(w), margin_(margin), mask_(h, w, true) {}

  // Paints a disc of the given radius; returns newly painted pixels.
  int stamp(double cy, double cx, double radius) {
    int painted = 0;
    const int y0 = std::max(margin_, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(h_ - 1 - margin_, static_cast<int>(std::ceil(cy + radius)));
    const int x0 = std::max(margin_, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(w_ - 1 - margin_, static_cast<int>(std::ceil(cx + radius)));
    const double r2 = radius * radius;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dy = y - cy;
        const double dx = x - cx;
        if (dy * dy + dx * dx <= r2 && mask_(y, x)) {
          mask_.set(y, x, false);
          ++painted;
        }
      }
    }
    return painted;
  }

  const MaskPlane& mask() const { return mask_; }

 private:
  int h_, w_, margin_;
  MaskPlane mask_;
};

MaskPlane draw_attempt(const MaskSpec& spec, int h, int w, int attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                    static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(attempt)};
  std::mt19937_64 rng(seq);
  const double area = static_cast<double>(h) * w;
  const double span = spec.ratio.hi() - spec.ratio.lo();
  // Stop at a target leaving headroom of at least one brush stamp below hi.
  std::uniform_real_distribution<double> target_dist(
      spec.ratio.lo() + 0.05 * span, spec.ratio.hi() - 0.25 * span);
  const double target = target_dist(rng) * area;
  const double stamp_cap = 0.2 * span * area;
  const int thickness_cap = std::clamp(
      static_cast<int>(std::floor(2.0 * std::sqrt(stamp_cap / std::numbers::pi))),
      kMinThickness, kMaxThickness);

  const int margin = spec.with_border ? kBorderMargin : 0;
  Canvas canvas(h, w, margin);
  std::uniform_int_distribution<int> strokes_dist(kMinStrokes, kMaxStrokes);
  std::uniform_int_distribution<int> thick_dist(kMinThickness, thickness_cap);
  std::uniform_real_distribution<double> ydist(margin, h - 1 - margin);
  std::uniform_real_distribution<double> xdist(margin, w - 1 - margin);
  std::uniform_real_distribution<double> angle_dist(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> turn_dist(0.0, 0.35);
  std::bernoulli_distribution sharp_turn(0.05);

  const int strokes = strokes_dist(rng);
  double painted = 0.0;
  for (int s = 0; s < strokes && painted < target; ++s) {
    const double budget = (target - painted) / (strokes - s);
    const double radius = thick_dist(rng) / 2.0;
    double y = ydist(rng);
    double x = xdist(rng);
    double angle = angle_dist(rng);
    const double step = std::max(1.0, radius * 0.5);
    double stroke_painted = 0.0;
    for (int k = 0; k < kMaxStampsPerStroke && stroke_painted < budget &&
                    painted < target;
         ++k) {
      const int n = canvas.stamp(y, x, radius);
      stroke_painted += n;
      painted += n;
      angle += sharp_turn(rng) ? angle_dist(rng) : turn_dist(rng);
      y += step * std::sin(angle);
      x += step * std::cos(angle);
      // Reflect off the drawable rectangle.
      if (y < margin || y > h - 1 - margin) {
        angle = -angle;
        y = std::clamp(y, static_cast<double>(margin), h - 1.0 - margin);
      }
      if (x < margin || x > w - 1 - margin) {
        angle = std::numbers::pi - angle;
        x = std::clamp(x, static_cast<double>(margin), w - 1.0 - margin);
      }
    }
  }
  return canvas.mask();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string RatioClass::str() const {
  return std::to_string(lo_percent) + "-" + std::to_string(hi_percent);
}

RatioClass RatioClass::parse(const std::string& text) {
  const auto dash = text.find('-');
  RatioClass r;
  try {
    if (dash == std::string::npos) throw std::invalid_argument("no dash");
    std::size_t used = 0;
    r.lo_percent = std::stoi(text.substr(0, dash), &used);
    if (used != dash) throw std::invalid_argument("trailing");
    const std::string hi = text.substr(dash + 1);
    r.hi_percent = std::stoi(hi, &used);
    if (used != hi.size()) throw std::invalid_argument("trailing");
  } catch (const std::logic_error&) {
    throw std::invalid_argument("bad ratio class '" + text + "', expected e.g. 10-20");
  }
  if (r.lo_percent < 0 || r.hi_percent > 100 || r.lo_percent >= r.hi_percent) {
    throw std::invalid_argument("bad ratio class '" + text + "'");
  }
  return r;
}

std::vector<RatioClass> parse_ratio_classes(const std::string& text) {
  std::vector<RatioClass> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(RatioClass::parse(item));
  }
  if (out.empty()) throw std::invalid_argument("no ratio classes in '" + text + "'");
  return out;
}

MaskPlane generate_mask(const MaskSpec& spec, int height, int width) {
  if (height <= 0 || width <= 0) {
    throw MaskGenerationError("generate_mask: dims must be positive");
  }
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    MaskPlane m = draw_attempt(spec, height, width, attempt);
    if (spec.ratio.contains(m.hole_fraction())) return m;
  }
  throw MaskGenerationError("generate_mask: class " + spec.ratio.str() +
                            " unreachable on " + std::to_string(height) + "x" +
                            std::to_string(width) + " after " +
                            std::to_string(kMaxAttempts) + " attempts");
}

}  // namespace glip
