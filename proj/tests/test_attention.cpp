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

#include <cmath>
#include <random>

#include "glip/attention.hpp"
#include "test_util.hpp"

using namespace glip;
using glip::testing::max_abs_diff;
using glip::testing::uniform;

namespace {

// Score for query q = (qy, qx) over source p = (py, px).
template <typename S>
S score(const Tensor<S>& s, int w, int qy, int qx, int py, int px) {
  return s(0, qy * w + qx, py, px);
}

}  // namespace

TEST_CASE("cosine self-similarity, orthogonality and antipodes") {
  Tensor<double> f({1, 2, 1, 4});
  // Locations: (1,0), (0,1), (-1,0), (0,0).
  f.mutable_values() << 1, 0, -1, 0, 0, 1, 0, 0;
  const auto z = cosine_scores(f);
  REQUIRE(z.dims() == Dims{1, 4, 1, 4});
  for (int q = 0; q < 3; ++q) CHECK(score(z, 4, 0, q, 0, q) == doctest::Approx(1.0));
  CHECK(score(z, 4, 0, 0, 0, 1) == doctest::Approx(0.0));
  CHECK(score(z, 4, 0, 0, 0, 2) == doctest::Approx(-1.0));
  // Zero vector: scores 0 against everything, itself included.
  for (int p = 0; p < 4; ++p) CHECK(score(z, 4, 0, 3, 0, p) == 0.0);
}

TEST_CASE("cosine scores match a direct computation") {
  std::mt19937_64 rng(51);
  const auto f = uniform<double>({1, 5, 3, 4}, rng);
  const auto z = cosine_scores(f);
  for (int q = 0; q < 12; ++q)
    for (int p = 0; p < 12; ++p) {
      double dot = 0, nq = 0, np = 0;
      for (int c = 0; c < 5; ++c) {
        const double a = f(0, c, q / 4, q % 4), b = f(0, c, p / 4, p % 4);
        dot += a * b;
        nq += a * a;
        np += b * b;
      }
      CHECK(z(0, q, p / 4, p % 4) == doctest::Approx(dot / std::sqrt(nq * np)).epsilon(1e-12));
    }
}

TEST_CASE("self score is maximal") {
  std::mt19937_64 rng(52);
  const auto z = cosine_scores(uniform<double>({1, 3, 4, 4}, rng));
  for (int q = 0; q < 16; ++q)
    for (int p = 0; p < 16; ++p)
      CHECK(z(0, q, q / 4, q % 4) >= z(0, q, p / 4, p % 4) - 1e-6);
}

TEST_CASE("softmax slices") {
  const auto u = attention_scores(Tensor<double>::constant({1, 6, 2, 3}, 0.3));
  CHECK((u.scores.values() - 1.0 / 6).abs().maxCoeff() < 1e-15);

  Tensor<double> peak({1, 1, 2, 2});
  peak.mutable_values() << 50, 0, 0, 0;
  const auto p = softmax_spatial(peak);
  CHECK(std::abs(p(0, 0, 0, 0) - 1.0) < 1e-9);

  std::mt19937_64 rng(53);
  const auto r = attention_scores(uniform<float>({1, 9, 3, 3}, rng, -20.0, 20.0));
  for (int q = 0; q < 9; ++q) {
    double s = 0;
    for (int i = 0; i < 9; ++i) {
      const float v = r.scores(0, q, i / 3, i % 3);
      CHECK(v > 0.0f);
      CHECK(v <= 1.0f);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-6);
  }
}

TEST_CASE("transpose_locations swaps query and source axes") {
  std::mt19937_64 rng(54);
  const auto s = uniform<double>({1, 6, 2, 3}, rng);
  const auto t = transpose_locations(s);
  REQUIRE(t.dims() == s.dims());
  for (int q = 0; q < 6; ++q)
    for (int p = 0; p < 6; ++p) CHECK(t(0, p, q / 3, q % 3) == s(0, q, p / 3, p % 3));
  CHECK(max_abs_diff(transpose_locations(t), s) == 0.0);
}

TEST_CASE("extract_patches with reflect padding") {
  Tensor<double> f({1, 1, 2, 3});
  f.mutable_values() << 1, 2, 3, 4, 5, 6;
  const auto p = extract_patches(f);
  REQUIRE(p.dims() == Dims{6, 1, 3, 3});
  // Patch centred on (0,0): rows mirror -1 -> 1, cols -1 -> 1.
  const double expect[3][3] = {{5, 4, 5}, {2, 1, 2}, {5, 4, 5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(p(0, 0, i, j) == expect[i][j]);
  CHECK(p(4, 0, 1, 1) == 5.0);
}

TEST_CASE("one-hot self scores reproduce a constant map") {
  const auto f = Tensor<double>::constant({1, 2, 3, 3}, 0.8);
  Tensor<double> s({1, 9, 3, 3});
  for (int q = 0; q < 9; ++q) s.mutable_values()[s.offset(0, q, q / 3, q % 3)] = 1.0;
  CHECK(max_abs_diff(attend_reconstruct(f, AttentionScores<double>{s}), f) < 1e-15);
}

TEST_CASE("constant maps stay constant under any scores") {
  std::mt19937_64 rng(55);
  const auto f = Tensor<double>::constant({1, 3, 4, 4}, -0.35);
  const auto s = attention_scores(uniform<double>({1, 16, 4, 4}, rng, -3, 3));
  CHECK(max_abs_diff(attend_reconstruct(f, s), f) < 1e-14);
  CHECK(max_abs_diff(feature_attention(f), f) < 1e-14);
}

TEST_CASE("one-hot scores copy patches: scatter-add oracle") {
  // 2x2 single channel; every query attends to source (1,1) except query
  // (0,1), which attends to (0,0).
  Tensor<double> f({1, 1, 2, 2});
  f.mutable_values() << 1, 2, 3, 4;
  Tensor<double> s({1, 4, 2, 2});
  const int target[4] = {3, 0, 3, 3};
  for (int q = 0; q < 4; ++q) s.mutable_values()[s.offset(0, q, target[q] / 2, target[q] % 2)] = 1;
  const auto out = attend_reconstruct(f, AttentionScores<double>{s});

  // Oracle: query location q receives the 3x3 source patch centred on its
  // target, placed centred on q; sum overlaps, divide by overlap count.
  const auto patches = extract_patches(f);
  double acc[2][2] = {}, cnt[2][2] = {};
  for (int q = 0; q < 4; ++q)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int y = q / 2 + i - 1, x = q % 2 + j - 1;
        if (y < 0 || x < 0 || y > 1 || x > 1) continue;
        acc[y][x] += patches(target[q], 0, i, j);
        cnt[y][x] += 1;
      }
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) CHECK(out(0, 0, y, x) == doctest::Approx(acc[y][x] / cnt[y][x]));
}

TEST_CASE("attention output is a convex blend") {
  std::mt19937_64 rng(56);
  const auto f = uniform<double>({1, 1, 4, 4}, rng);
  const auto out = feature_attention(f);
  CHECK(out.values().minCoeff() >= f.values().minCoeff() - 1e-12);
  CHECK(out.values().maxCoeff() <= f.values().maxCoeff() + 1e-12);
}

TEST_CASE("feature_attention runs per sample") {
  std::mt19937_64 rng(57);
  const auto a = uniform<float>({1, 3, 4, 4}, rng);
  const auto b = uniform<float>({1, 3, 4, 4}, rng);
  const std::vector<Tensor<float>> both{a, b};
  const auto out = feature_attention(concat_batch<float>(both));
  CHECK(max_abs_diff(slice_batch(out, 0), feature_attention(a)) == 0.0);
  CHECK(max_abs_diff(slice_batch(out, 1), feature_attention(b)) == 0.0);
}
