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


#include <doctest.h>

#include <random>

#include "glip/reinpaint.hpp"
#include "test_util.hpp"

using namespace glip;
using glip::testing::max_abs_diff;
using glip::testing::random_mask;
using glip::testing::uniform;

namespace {

template <typename S>
void zero(std::array<ConvSpec<S>, 3>& convs) {
  for (auto& c : convs) {
    c.weight.mutable_values().setZero();
    c.bias.mutable_values().setZero();
  }
}

std::vector<MaskPlane> history_from(const MaskPlane& h0, int T) {
  std::vector<MaskPlane> h{h0};
  for (int t = 0; t < T; ++t)
    h.push_back(update_mask(update_mask(h.back(), 3, 3, 1, 1), 3, 3, 1, 1));
  return h;
}

}  // namespace

TEST_CASE("zero reinpainting weights leave sub-volumes unchanged") {
  std::mt19937_64 rng(71);
  auto w = make_reinpaint_weights<double>(2, rng);
  zero(w.branch1);
  zero(w.branch2);
  const auto f = uniform<double>({1, 6, 6, 6}, rng);
  const auto h = history_from(random_mask(1, 6, 6, 0.3, rng), 3);
  for (int tau = 1; tau <= 3; ++tau)
    CHECK(max_abs_diff(reinpaint_step(f, h, tau, 2, w), slice_channels(f, 2 * (tau - 1), 2)) == 0.0);
}

TEST_CASE("the last sub-volume passes through") {
  std::mt19937_64 rng(72);
  const auto w = make_reinpaint_weights<float>(2, rng);
  const auto f = uniform<float>({1, 6, 4, 4}, rng);
  const auto h = history_from(random_mask(1, 4, 4, 0.5, rng), 3);
  CHECK(max_abs_diff(reinpaint_step(f, h, 3, 2, w), slice_channels(f, 4, 2)) == 0.0);
  CHECK_THROWS(reinpaint_step(f, h, 0, 2, w));
  CHECK_THROWS(reinpaint_step(f, h, 4, 2, w));
}

TEST_CASE("branch 2 vanishes where the mask did not change") {
  std::mt19937_64 rng(73);
  auto w = make_reinpaint_weights<double>(2, rng);
  zero(w.branch1);
  for (auto& c : w.branch2) c.bias = uniform<double>(c.bias.dims(), rng);
  const auto f = uniform<double>({1, 6, 8, 8}, rng);
  const auto h = history_from(random_mask(1, 8, 8, 0.1, rng), 3);
  const auto out = reinpaint_step(f, h, 1, 2, w);
  const auto base = slice_channels(f, 0, 2);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const bool changed = h[1](y, x) != h[0](y, x);
      for (int c = 0; c < 2; ++c) {
        if (!changed) CHECK(out(0, c, y, x) == base(0, c, y, x));
      }
    }
  // With all masks full the difference is empty everywhere.
  const std::vector<MaskPlane> full(4, MaskPlane(8, 8, true));
  CHECK(max_abs_diff(reinpaint_step(f, full, 2, 2, w), slice_channels(f, 2, 2)) == 0.0);
}

TEST_CASE("tau = 1 ignores the void slot") {
  std::mt19937_64 rng(74);
  const auto w = make_reinpaint_weights<float>(2, rng);
  const auto f = uniform<float>({1, 6, 4, 4}, rng);
  const auto h = history_from(random_mask(1, 4, 4, 0.5, rng), 3);
  // Changing sub-volume 3 must not matter at tau = 1 (only 1 and 2 feed it).
  auto g = f.clone();
  for (int c = 4; c < 6; ++c)
    for (int i = 0; i < 16; ++i) g.mutable_values()[g.offset(0, c, i / 4, i % 4)] += 1.0f;
  CHECK(max_abs_diff(reinpaint_step(f, h, 1, 2, w), reinpaint_step(g, h, 1, 2, w)) == 0.0);
}

TEST_CASE("feature merge weighting") {
  std::mt19937_64 rng(75);
  SUBCASE("identical volumes and full masks give the common volume") {
    const auto v = uniform<double>({1, 2, 3, 3}, rng);
    const std::vector<Tensor<double>> vols{v, v, v};
    const std::vector<MaskPlane> h(4, MaskPlane(3, 3, true));
    CHECK(max_abs_diff(feature_merge(vols, h), v) < 1e-15);
  }
  SUBCASE("counting oracle for first-valid iteration") {
    const int T = 3;
    std::vector<Tensor<double>> vols;
    for (int t = 0; t < T; ++t) vols.push_back(uniform<double>({1, 1, 5, 5}, rng));
    const auto h = history_from(random_mask(1, 5, 5, 0.08, rng), T);
    const auto merged = feature_merge(vols, h);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x) {
        double s = 0;
        int n = 0;
        for (int t = 1; t <= T; ++t)
          if (h[t](y, x)) {
            s += vols[t - 1](0, 0, y, x);
            ++n;
          }
        const double expect = n == 0 ? vols[T - 1](0, 0, y, x) : s / n;
        CHECK(merged(0, 0, y, x) == doctest::Approx(expect).epsilon(1e-14));
      }
  }
  SUBCASE("T=2 with w1=0, w2=1 picks the second volume") {
    MaskPlane h0(1, 1, false), h1(1, 1, false), h2(1, 1, true);
    const auto a = Tensor<double>::constant({1, 1, 1, 1}, 3.0);
    const auto b = Tensor<double>::constant({1, 1, 1, 1}, 7.0);
    const std::vector<Tensor<double>> vols{a, b};
    CHECK(feature_merge(vols, {h0, h1, h2}).item() == 7.0);
  }
  SUBCASE("never-filled locations take the last volume") {
    const MaskPlane hole(1, 1, false);
    const auto a = Tensor<double>::constant({1, 1, 1, 1}, 3.0);
    const auto b = Tensor<double>::constant({1, 1, 1, 1}, 7.0);
    const std::vector<Tensor<double>> vols{a, b};
    CHECK(feature_merge(vols, {hole, hole, hole}).item() == 7.0);
  }
}

TEST_CASE("reconstruct shapes and range") {
  std::mt19937_64 rng(76);
  ReconstructWidths widths;
  widths.up = {8, 8, 8};
  const auto w = make_reconstruct_weights<float>(4, widths, rng);
  const auto x = uniform<float>({1, 4, 4, 4}, rng, -3.0, 3.0);
  const auto out = reconstruct(x, random_mask(1, 4, 4, 0.5, rng), w);
  CHECK(out.dims() == Dims{1, 3, 32, 32});
  CHECK(out.values().minCoeff() >= 0.0f);
  CHECK(out.values().maxCoeff() <= 1.0f);
  CHECK(w.head[0].out_channels() == 4);
  CHECK(w.head[1].out_channels() == 2);
  CHECK(w.head[2].kernel_h() == 1);
}

TEST_CASE("composite mixes by mask") {
  std::mt19937_64 rng(77);
  const auto out = uniform<float>({1, 3, 4, 4}, rng);
  const auto img = uniform<float>({1, 3, 4, 4}, rng);
  CHECK(max_abs_diff(composite(out, img, MaskPlane(4, 4, true)), img) == 0.0);
  CHECK(max_abs_diff(composite(out, img, MaskPlane(4, 4, false)), out) == 0.0);
  const MaskPlane m = random_mask(1, 4, 4, 0.5, rng);
  const auto c = composite(out, img, m);
  for (int ch = 0; ch < 3; ++ch)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) CHECK(c(0, ch, y, x) == (m(y, x) ? img : out)(0, ch, y, x));
}
