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

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include "glip/checkpoint.hpp"
#include "glip/gradcheck.hpp"
#include "glip/losses.hpp"
#include "test_util.hpp"

using namespace glip;
using glip::testing::random_mask;
using glip::testing::uniform;

namespace {

// One stage: 1x1 identity over `c` channels, ReLU, 2x2 max pool.
template <typename S>
FeatureExtractor<S> identity_extractor(int c) {
  Tensor<S> w({c, c, 1, 1});
  for (int i = 0; i < c; ++i) w.mutable_values()[w.offset(i, i, 0, 0)] = S(1);
  return FeatureExtractor<S>({ConvSpec<S>(w, Tensor<S>::zeros({1, c, 1, 1}), 1, 0)});
}

template <typename S>
S value(const Tensor<S>& t) {
  return t.item();
}

}  // namespace

TEST_CASE("default extractor geometry and determinism") {
  const auto fx = FeatureExtractor<float>::make_default();
  REQUIRE(fx.stages().size() == 3);
  CHECK(fx.stages()[0].out_channels() == 16);
  CHECK(fx.stages()[1].out_channels() == 32);
  CHECK(fx.stages()[2].out_channels() == 64);
  std::mt19937_64 rng(81);
  const auto img = uniform<float>({1, 3, 16, 16}, rng, 0, 1);
  const auto f = fx.features(img);
  REQUIRE(f.size() == 3);
  CHECK(f[0].dims() == Dims{1, 16, 8, 8});
  CHECK(f[2].dims() == Dims{1, 64, 2, 2});
  const auto g = FeatureExtractor<float>::make_default().features(img);
  CHECK((f[2].values() == g[2].values()).all());
}

TEST_CASE("every term is zero at a perfect reconstruction") {
  std::mt19937_64 rng(82);
  const auto img = uniform<float>({1, 3, 16, 16}, rng, 0, 1);
  const auto fx = FeatureExtractor<float>::make_default();
  const auto t = compute_losses(img, img, random_mask(1, 16, 16, 0.6, rng), fx);
  CHECK(value(t.valid) == 0.0f);
  CHECK(value(t.hole) == 0.0f);
  CHECK(value(t.perceptual) == 0.0f);
  CHECK(value(t.style) == 0.0f);
  // Smoothness is a property of the output alone.
  CHECK(value(composite_loss(t, LossWeights{})) == doctest::Approx(0.1f * value(t.tv)));
  // tv of a constant image is 0 whatever the target.
  const auto flat = Tensor<float>::constant({1, 3, 16, 16}, 0.3f);
  CHECK(value(tv_loss(flat, MaskPlane(16, 16, true))) == 0.0f);
}

TEST_CASE("perceptual loss closed forms") {
  std::mt19937_64 rng(83);
  const auto fx = identity_extractor<double>(3);
  const auto a = uniform<double>({1, 3, 4, 4}, rng, 0.0, 0.5);
  const auto b = add(a, Tensor<double>::constant(a.dims(), 0.5));
  CHECK(value(perceptual_loss(a, b, fx)) == doctest::Approx(0.5));
  const auto def = FeatureExtractor<double>::make_default();
  const auto c = uniform<double>({1, 3, 8, 8}, rng, 0, 1);
  CHECK(value(perceptual_loss(a, b, fx)) == value(perceptual_loss(b, a, fx)));
  CHECK(value(perceptual_loss(c, scale(c, 0.5), def)) ==
        doctest::Approx(value(perceptual_loss(scale(c, 0.5), c, def))));
}

TEST_CASE("style loss on a single-channel 2x2 map") {
  // Identity 1x1 extractor on one channel, 4x4 input pooled to 2x2.
  const auto fx = identity_extractor<double>(1);
  Tensor<double> a({1, 1, 4, 4}), b({1, 1, 4, 4});
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      a.mutable_values()[a.offset(0, 0, y, x)] = (y < 2 && x < 2) ? 1.0 : 0.0;  // pooled [1 0; 0 0]
      b.mutable_values()[b.offset(0, 0, y, x)] = 2.0;                          // pooled [2 2; 2 2]
    }
  // Gram = sum(phi^2) / (H W C): a -> 1/4, b -> 16/4 = 4; C^2 = 1.
  CHECK(value(style_loss(a, b, fx)) == doctest::Approx(4.0 - 0.25));
}

TEST_CASE("style loss ignores identical spatial permutations") {
  std::mt19937_64 rng(84);
  // A 1x1-kernel extractor on 2x2 blocks: permuting whole 2x2 blocks
  // permutes the pooled feature locations.
  const auto w = uniform<double>({2, 3, 1, 1}, rng);
  const FeatureExtractor<double> fx({ConvSpec<double>(w, Tensor<double>::zeros({1, 2, 1, 1}), 1, 0)});
  const auto a = uniform<double>({1, 3, 6, 6}, rng, 0, 1);
  const auto b = uniform<double>({1, 3, 6, 6}, rng, 0, 1);
  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto permute = [&](const Tensor<double>& t) {
    Tensor<double> o(t.dims());
    for (int blk = 0; blk < 9; ++blk) {
      const int src = perm[blk];
      for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            o.mutable_values()[o.offset(0, c, 2 * (blk / 3) + i, 2 * (blk % 3) + j)] =
                t(0, c, 2 * (src / 3) + i, 2 * (src % 3) + j);
    }
    return o;
  };
  CHECK(value(style_loss(permute(a), permute(b), fx)) ==
        doctest::Approx(value(style_loss(a, b, fx))).epsilon(1e-12));
}

TEST_CASE("tv loss closed forms") {
  Tensor<float> pair({1, 1, 1, 2});
  pair.mutable_values() << 0.0f, 1.0f;
  CHECK(value(tv_loss(pair, MaskPlane(1, 2, true))) == doctest::Approx(0.5f));
  // Pairs need both pixels inside the region.
  MaskPlane half(1, 2, true);
  half.set(0, 1, false);
  CHECK(value(tv_loss(pair, half)) == 0.0f);
  std::mt19937_64 rng(85);
  const auto x = uniform<double>({1, 3, 6, 6}, rng);
  const MaskPlane r = random_mask(1, 6, 6, 0.5, rng);
  CHECK(value(tv_loss(add(x, Tensor<double>::constant(x.dims(), 0.25)), r)) ==
        doctest::Approx(value(tv_loss(x, r))).epsilon(1e-12));
}

TEST_CASE("valid and hole losses") {
  std::mt19937_64 rng(86);
  const auto a = uniform<double>({1, 3, 4, 4}, rng);
  const auto b = uniform<double>({1, 3, 4, 4}, rng);
  CHECK(value(valid_loss(a, b, MaskPlane(4, 4, false))) == 0.0);
  // Uniform difference 0.2, half the pixels holes -> 0.1 each.
  const auto c = add(a, Tensor<double>::constant(a.dims(), 0.2));
  MaskPlane half(4, 4, true);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x) half.set(y, x, false);
  CHECK(value(valid_loss(c, a, half)) == doctest::Approx(0.1));
  CHECK(value(hole_loss(c, a, half)) == doctest::Approx(0.1));
  for (int trial = 0; trial < 10; ++trial) {
    const MaskPlane m = random_mask(1, 4, 4, 0.5, rng);
    const double unmasked = (a.values() - b.values()).abs().mean();
    CHECK(std::abs(value(valid_loss(a, b, m)) + value(hole_loss(a, b, m)) - unmasked) < 1e-6);
  }
}

TEST_CASE("composite weighting") {
  auto s = [](double v) { return Tensor<double>::scalar(v); };
  const LossTerms<double> t{s(1), s(2), s(3), s(4), s(5)};
  CHECK(value(composite_loss(t, LossWeights{})) == 493.65);
  CHECK(value(composite_loss(t, LossWeights{0, 0, 0, 0, 0})) == 0.0);
  const LossTerms<float> tf{Tensor<float>::scalar(1), Tensor<float>::scalar(2),
                            Tensor<float>::scalar(3), Tensor<float>::scalar(4),
                            Tensor<float>::scalar(5)};
  CHECK(value(composite_loss(tf, LossWeights{})) == doctest::Approx(493.65f));
}

TEST_CASE("composite gradient on an 8x8 toy") {
  std::mt19937_64 rng(87);
  auto out = uniform<double>({1, 3, 8, 8}, rng, 0, 1);
  const auto gt = uniform<double>({1, 3, 8, 8}, rng, 0, 1);
  const MaskPlane m = random_mask(1, 8, 8, 0.6, rng);
  const auto fx = FeatureExtractor<float>::make_default().cast<double>();
  GradcheckOptions o;
  o.epsilon = 1e-6;
  o.retry_epsilons = {1e-7, 1e-8};
  o.retry_above = 1e-4;
  const auto rep = gradcheck<double>(
      [&] { return composite_loss(compute_losses(out, gt, m, fx), LossWeights{}); }, {out}, o);
  CHECK(rep.max_rel_error < 1e-3);
}

TEST_CASE("extractor weights load from a checkpoint file") {
  const auto fx = FeatureExtractor<float>::make_default(7);
  Checkpoint ck;
  for (std::size_t i = 0; i < fx.stages().size(); ++i) {
    ck.parameters.emplace_back("stage." + std::to_string(i) + ".weight", fx.stages()[i].weight);
    ck.parameters.emplace_back("stage." + std::to_string(i) + ".bias", fx.stages()[i].bias);
  }
  const auto path = std::filesystem::temp_directory_path() / "glip_extractor_test.ckpt";
  save_checkpoint(path, ck);
  const auto loaded = FeatureExtractor<float>::load(path.string());
  std::filesystem::remove(path);
  REQUIRE(loaded.stages().size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK((loaded.stages()[i].weight.values() == fx.stages()[i].weight.values()).all());
}
