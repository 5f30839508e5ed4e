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


#ifndef GLIP_ATTENTION_HPP_
#define GLIP_ATTENTION_HPP_

#include "glip/tensor.hpp"

// Non-local feature attention over a single sample. Score tensors are laid
// out (1, h*w, h, w): channel q = i*w + j is the query location (i, j) and
// its h x w plane holds that query's scores over every source location.
namespace glip {

inline constexpr double kNormFloor = 1e-8;

// Divides every location's channel vector by max(||f||, kNormFloor).
template <typename Scalar>
Tensor<Scalar> normalize_locations(const Tensor<Scalar>& f);

// Inner products of every location pair: out(0, q, p) = <f_q, f_p>.
template <typename Scalar>
Tensor<Scalar> location_similarity(const Tensor<Scalar>& f);

// Softmax over each channel's h x w plane, max-subtracted.
template <typename Scalar>
Tensor<Scalar> softmax_spatial(const Tensor<Scalar>& x);

// Swaps the query (channel) and source (spatial) axes of a score tensor.
template <typename Scalar>
Tensor<Scalar> transpose_locations(const Tensor<Scalar>& scores);

// 3x3 patches centered at every location with reflect padding, shaped
// (h*w, c, 3, 3) for use as transposed-convolution filters.
template <typename Scalar>
Tensor<Scalar> extract_patches(const Tensor<Scalar>& f);

// Cosine similarity of every location pair; zero vectors score 0.
template <typename Scalar>
Tensor<Scalar> cosine_scores(const Tensor<Scalar>& f);

template <typename Scalar>
struct AttentionScores {
  Tensor<Scalar> scores;  // (1, h*w, h, w), each plane sums to 1
};

template <typename Scalar>
AttentionScores<Scalar> attention_scores(const Tensor<Scalar>& raw);

// Each query location becomes the score-weighted blend of the 3x3 source
// patches, scattered by transposed convolution and divided by the number of
// overlapping patches.
template <typename Scalar>
Tensor<Scalar> attend_reconstruct(const Tensor<Scalar>& f,
                                  const AttentionScores<Scalar>& s);

// Full attention applied per batch sample.
template <typename Scalar>
Tensor<Scalar> feature_attention(const Tensor<Scalar>& f);

}  // namespace glip

#endif  // GLIP_ATTENTION_HPP_
