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

#include "glip/pyramid.hpp"
#include "test_util.hpp"

using namespace glip;
using glip::testing::max_abs_diff;
using glip::testing::uniform;

namespace {

template <typename S>
void zero(ConvSpec<S>& s) {
  s.weight.mutable_values().setZero();
  if (s.bias.defined()) s.bias.mutable_values().setZero();
}

template <typename S>
void zero_all(PyramidWeights<S>& w) {
  zero(w.stem);
  for (auto& m : w.modules) {
    zero(m.conv_gs);
    zero(m.conv_up);
  }
}

}  // namespace

TEST_CASE("gaussian level of a constant is the constant at half size") {
  const auto g = gaussian_level(Tensor<float>::constant({1, 2, 6, 8}, 0.4f));
  REQUIRE(g.dims() == Dims{1, 2, 3, 4});
  CHECK((g.values() - 0.4f).abs().maxCoeff() < 1e-7);
}

TEST_CASE("gaussian level of a corner impulse") {
  Tensor<double> x({1, 1, 4, 4});
  x.mutable_values()[0] = 1.0;
  const auto g = gaussian_level(x);
  REQUIRE(g.dims() == Dims{1, 1, 2, 2});
  // Reflect padding mirrors row/col 1 onto -1, so the corner sees its own
  // centre weight only; kept samples are even rows/cols.
  CHECK(g(0, 0, 0, 0) == 4.0 / 16);
  CHECK(g(0, 0, 0, 1) == 0.0);
  CHECK(g(0, 0, 1, 0) == 0.0);
  Tensor<double> y({1, 1, 4, 4});
  y.mutable_values()[y.offset(0, 0, 1, 1)] = 1.0;
  const auto h = gaussian_level(y);
  // (1,1) is also seen at its mirrors (-1,-1), (-1,1), (1,-1).
  CHECK(h(0, 0, 0, 0) == 4.0 / 16);
  CHECK(h(0, 0, 0, 1) == 2.0 / 16);
  CHECK(h(0, 0, 1, 1) == 1.0 / 16);
}

TEST_CASE("laplacian residual of a constant is zero and reconstruction is exact") {
  const auto c = Tensor<float>::constant({1, 3, 8, 8}, 0.625f);
  CHECK(laplacian_level(c, gaussian_level(c)).values().isZero());
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> byte(0, 255);
  for (const Dims d : {Dims{1, 1, 8, 8}, Dims{2, 3, 7, 9}, Dims{1, 2, 5, 4}}) {
    // Values k/256: blur results sit on a 1/4096 lattice, so every
    // intermediate is exact in float and reconstruction is bit-exact.
    Tensor<float> x(d);
    for (auto& v : x.mutable_values()) v = static_cast<float>(byte(rng)) / 256.0f;
    const auto g = gaussian_level(x);
    CHECK(g.h() == (d.h + 1) / 2);
    const auto up = crop(upsample_nearest(g, 2), 0, 0, d.h, d.w);
    CHECK(max_abs_diff(add(laplacian_level(x, g), up), x) == 0.0);

    const auto r = uniform<double>(d, rng);
    const auto gr = gaussian_level(r);
    const auto upr = crop(upsample_nearest(gr, 2), 0, 0, d.h, d.w);
    CHECK(max_abs_diff(add(laplacian_level(r, gr), upr), r) <= 4e-16);
  }
  CHECK_THROWS_AS(laplacian_level(c, Tensor<float>({1, 3, 3, 4})), ShapeError);
}

TEST_CASE("GLE with zero weights passes the input through as the residual") {
  std::mt19937_64 rng(32);
  auto w = make_gle_weights<float>(4, rng);
  zero(w.conv_gs);
  zero(w.conv_up);
  const auto x = uniform<float>({1, 4, 16, 16}, rng);
  const auto o = gle_forward(x, w);
  CHECK(max_abs_diff(o.residual, x) == 0.0);
  CHECK(o.next.values().isZero());
  CHECK(o.next.dims() == Dims{1, 8, 8, 8});
}

TEST_CASE("GLE with zero conv_up keeps the residual exact for any conv_gs") {
  std::mt19937_64 rng(33);
  auto w = make_gle_weights<float>(2, rng);
  zero(w.conv_up);
  const auto x = uniform<float>({1, 2, 8, 8}, rng);
  CHECK(max_abs_diff(gle_forward(x, w).residual, x) == 0.0);
}

TEST_CASE("GLE shapes and the direct (ablated) path") {
  std::mt19937_64 rng(34);
  const auto w = make_gle_weights<float>(3, rng);
  const auto x = uniform<float>({1, 3, 16, 16}, rng);
  const auto o = gle_forward(x, w, true);
  CHECK(o.residual.dims() == x.dims());
  CHECK(o.next.dims() == Dims{1, 6, 8, 8});
  const auto d = gle_forward(x, w, false);
  CHECK(max_abs_diff(d.next, conv2d(x, w.conv_gs)) == 0.0);
  CHECK(max_abs_diff(d.residual, conv2d(d.next, w.conv_up)) == 0.0);
  CHECK(d.residual.dims() == Dims{1, 3, 8, 8});
}

TEST_CASE("pyramid shapes, channel ladder and masks") {
  std::mt19937_64 rng(35);
  const auto w = make_pyramid_weights<float>(2, rng);
  const auto img = uniform<float>({1, 3, 64, 64}, rng, 0.0, 1.0);
  MaskPlane m(64, 64, true);
  m.set(10, 12, false);
  const auto p = extract_pyramid(img, img, m, w);
  for (int i = 0; i < 5; ++i) {
    CHECK(p.levels[i].dims() == Dims{1, 2 << i, 64 >> i, 64 >> i});
    CHECK(p.level_masks[i].height() == (64 >> i));
  }
  CHECK(p.levels[5].dims() == Dims{1, 64, 2, 2});
  CHECK(p.level_masks[5].height() == 2);
  CHECK(p.input_mask == m);

  CHECK_THROWS_AS(extract_pyramid(uniform<float>({1, 3, 48, 48}, rng), uniform<float>({1, 3, 48, 48}, rng),
                                  MaskPlane(48, 48, true), w),
                  ShapeError);
  CHECK_THROWS_AS(extract_pyramid(img, img, MaskPlane(32, 32, true), w), ShapeError);
}

TEST_CASE("zero-weight pyramid is all zeros") {
  std::mt19937_64 rng(36);
  auto w = make_pyramid_weights<float>(2, rng);
  zero_all(w);
  const auto img = uniform<float>({1, 3, 32, 32}, rng, 0.0, 1.0);
  const auto p = extract_pyramid(img, img, MaskPlane(32, 32, true), w);
  for (const auto& f : p.levels) CHECK(f.values().isZero());
}

TEST_CASE("stem bias alone reaches F1 through the ReLU") {
  std::mt19937_64 rng(37);
  auto w = make_pyramid_weights<float>(2, rng);
  zero_all(w);
  w.stem.bias.mutable_values() << 0.5f, -0.5f;
  const auto img = uniform<float>({1, 3, 32, 32}, rng, 0.0, 1.0);
  const auto p = extract_pyramid(img, img, MaskPlane(32, 32, true), w);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      CHECK(p.levels[0](0, 0, y, x) == 0.5f);
      CHECK(p.levels[0](0, 1, y, x) == 0.0f);
    }
  for (int i = 1; i < 6; ++i) CHECK(p.levels[i].values().isZero());
}

TEST_CASE("hole pixel values never reach the pyramid") {
  std::mt19937_64 rng(38);
  const auto w = make_pyramid_weights<float>(2, rng);
  const auto img = uniform<float>({1, 3, 32, 32}, rng, 0.0, 1.0);
  MaskPlane m(32, 32, true);
  for (int y = 8; y < 20; ++y)
    for (int x = 4; x < 16; ++x) m.set(y, x, false);
  auto noisy = img.clone();
  noisy.mutable_values() += m.inverted().expand<float>(3).values() * 0.9f;
  const auto a = extract_pyramid(img, img, m, w);
  const auto b = extract_pyramid(noisy, noisy, m, w);
  for (int i = 0; i < 6; ++i) CHECK(max_abs_diff(a.levels[i], b.levels[i]) == 0.0);
}

TEST_CASE("high-frequency content raises early residual energy") {
  std::mt19937_64 rng(39);
  const auto w = make_pyramid_weights<double>(4, rng);
  Tensor<double> checker({1, 3, 32, 32});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        checker.mutable_values()[checker.offset(0, c, y, x)] = ((x + y) % 2) ? 1.0 : 0.0;
  const auto flat = Tensor<double>::constant({1, 3, 32, 32}, 0.5);
  const MaskPlane m(32, 32, true);
  const double hi = extract_pyramid(checker, checker, m, w).levels[0].values().abs().mean();
  const double lo = extract_pyramid(flat, flat, m, w).levels[0].values().abs().mean();
  CHECK(hi > lo);
}

TEST_CASE("split projects to the working resolution") {
  std::mt19937_64 rng(40);
  const auto w = make_pyramid_weights<float>(2, rng);
  const auto proj = make_projection_weights<float>(2, 3, rng);
  CHECK(proj[5].in_channels() == 64);
  const auto img = uniform<float>({1, 3, 64, 64}, rng, 0.0, 1.0);
  MaskPlane m(64, 64, true);
  m.set(0, 0, false);
  m.set(9, 9, false);
  const auto p = extract_pyramid(img, img, m, w);
  const auto s = split_pyramid(p, proj);
  CHECK(s.low.dims() == Dims{1, 9, 8, 8});
  CHECK(s.high.dims() == Dims{1, 9, 8, 8});
  CHECK(s.mask == m.downsample_nearest(8));
  CHECK_FALSE(s.mask(0, 0));

  SUBCASE("F_low depends on F1..F3 only") {
    auto p2 = p;
    p2.levels[0] = scale(p.levels[0], 2.0f);
    const auto s2 = split_pyramid(p2, proj);
    CHECK(max_abs_diff(s2.high, s.high) == 0.0);
    CHECK(max_abs_diff(s2.low, s.low) > 0.0);
  }
  SUBCASE("zero projections give zero features") {
    auto zp = proj;
    for (auto& c : zp) zero(c);
    const auto z = split_pyramid(p, zp);
    CHECK(z.low.values().isZero());
    CHECK(z.high.values().isZero());
  }
}

TEST_CASE("split follows the image resolution when GLE is ablated") {
  std::mt19937_64 rng(41);
  const auto w = make_pyramid_weights<float>(2, rng);
  const auto proj = make_projection_weights<float>(2, 3, rng);
  const auto img = uniform<float>({1, 3, 64, 64}, rng, 0.0, 1.0);
  const auto p = extract_pyramid(img, img, MaskPlane(64, 64, true), w, false);
  CHECK(p.levels[0].dims() == Dims{1, 2, 32, 32});
  const auto s = split_pyramid(p, proj);
  CHECK(s.low.dims() == Dims{1, 9, 8, 8});
  CHECK(s.mask.height() == 8);
}
