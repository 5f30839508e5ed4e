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

#include "glip/attention.hpp"
#include "glip/iterative.hpp"
#include "test_util.hpp"

using namespace glip;
using glip::testing::max_abs_diff;
using glip::testing::random_mask;
using glip::testing::uniform;

namespace {

template <typename S>
void zero_branch(BranchWeights<S>& w) {
  for (ConvSpec<S>* c : {&w.pconv1, &w.pconv2}) {
    c->weight.mutable_values().setZero();
    c->bias.mutable_values().setZero();
  }
}

}  // namespace

TEST_CASE("all-valid masks stay valid and the branch reduces to plain convs") {
  std::mt19937_64 rng(61);
  const auto w = make_branch_weights<double>(4, rng);
  const auto x = uniform<double>({1, 4, 4, 4}, rng);
  MaskPlane out;
  const auto y = branch_forward(x, MaskPlane(4, 4, true), w, false, &out);
  CHECK(out.all_valid());
  const auto h = leaky_relu(batchnorm(conv2d(x, w.pconv1), w.bn1, false));
  const auto ref = feature_attention(leaky_relu(batchnorm(conv2d(h, w.pconv2), w.bn2, false)));
  CHECK(max_abs_diff(y, ref) < 1e-12);
}

TEST_CASE("zero weights give zero features") {
  std::mt19937_64 rng(62);
  auto w = make_branch_weights<float>(3, rng);
  zero_branch(w);
  const IterState<float> s{uniform<float>({1, 3, 4, 4}, rng), uniform<float>({1, 3, 4, 4}, rng),
                           MaskPlane(4, 4, true), 0};
  const auto next = iterate_once(s, w, w, false);
  CHECK(next.low.values().isZero());
  CHECK(next.high.values().isZero());
  CHECK(next.tau == 1);
}

TEST_CASE("each iteration advances the hole front two rings") {
  std::mt19937_64 rng(63);
  const auto w = make_branch_weights<float>(2, rng);
  MaskPlane m(12, 12, true);
  for (int y = 4; y < 8; ++y)
    for (int x = 4; x < 8; ++x) m.set(y, x, false);  // inradius 2
  const auto low = uniform<float>({1, 2, 12, 12}, rng);
  const auto r = run_iterations(low, low, m, 2, w, w);
  REQUIRE(r.mask_history.size() == 3);
  CHECK(r.mask_history[0] == m);
  CHECK(r.mask_history[1] == update_mask(update_mask(m, 3, 3, 1, 1), 3, 3, 1, 1));
  CHECK(r.mask_history[1].all_valid());
}

TEST_CASE("mask history is monotone and closes holes of inradius <= 2T") {
  std::mt19937_64 rng(64);
  const auto w = make_branch_weights<float>(2, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const MaskPlane m = random_mask(1, 8, 8, 0.3, rng);
    const auto x = uniform<float>({1, 2, 8, 8}, rng);
    const auto r = run_iterations(x, x, m, 3, w, w);
    for (std::size_t t = 1; t < r.mask_history.size(); ++t)
      CHECK(r.mask_history[t].covers(r.mask_history[t - 1]));
  }
  MaskPlane big(16, 16, true);
  for (int y = 2; y < 14; ++y)
    for (int x = 2; x < 14; ++x) big.set(y, x, false);  // inradius 6
  const auto x = uniform<float>({1, 2, 16, 16}, rng);
  CHECK(run_iterations(x, x, big, 3, w, w).mask_history.back().all_valid());
  CHECK_FALSE(run_iterations(x, x, big, 2, w, w).mask_history.back().all_valid());
}

TEST_CASE("F_cat layout, determinism and T >= 2") {
  std::mt19937_64 rng(65);
  const auto wl = make_branch_weights<float>(3, rng);
  const auto wh = make_branch_weights<float>(3, rng);
  const auto lo = uniform<float>({1, 3, 4, 4}, rng);
  const auto hi = uniform<float>({1, 3, 4, 4}, rng);
  const MaskPlane m = random_mask(1, 4, 4, 0.6, rng);
  const auto a = run_iterations(lo, hi, m, 3, wl, wh);
  const auto b = run_iterations(lo, hi, m, 3, wl, wh);
  CHECK(a.cat.c() == 2 * 3 * 3);
  CHECK(max_abs_diff(a.cat, b.cat) == 0.0);
  // The first block is F_low(1).
  IterState<float> s{lo, hi, m, 0};
  const auto one = iterate_once(s, wl, wh, false);
  CHECK(max_abs_diff(slice_channels(a.cat, 0, 3), one.low) == 0.0);
  CHECK(max_abs_diff(slice_channels(a.cat, 3, 3), one.high) == 0.0);
  CHECK_THROWS_AS(run_iterations(lo, hi, m, 1, wl, wh), std::invalid_argument);
}

TEST_CASE("fuse and sub-volumes") {
  std::mt19937_64 rng(66);
  const auto cat = uniform<float>({1, 12, 4, 4}, rng);
  auto conv = make_conv<float>(12, 12, 3, 1, 1, rng);
  const auto f = fuse(cat, conv);
  CHECK(f.dims() == cat.dims());
  std::vector<Tensor<float>> parts;
  for (int t = 1; t <= 3; ++t) parts.push_back(sub_volume(f, t, 4));
  CHECK(max_abs_diff(concat_channels<float>(parts), f) == 0.0);
  CHECK_THROWS(sub_volume(f, 4, 4));
  CHECK_THROWS(sub_volume(f, 0, 4));
  conv.weight.mutable_values().setZero();
  CHECK(fuse(cat, conv).values().isZero());
  CHECK_THROWS_AS(fuse(cat, make_conv<float>(12, 6, 3, 1, 1, rng)), ShapeError);
}
