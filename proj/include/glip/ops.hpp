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

#ifndef GLIP_OPS_HPP_
#define GLIP_OPS_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "glip/tensor.hpp"

// Differentiable tensor operators. Every function here records a backward
// rule on the active tape when one of its inputs requires a gradient, and
// throws NumericError if its output is not finite. Binary ops never
// broadcast: operands must have identical dims.
namespace glip {

// Convolution weights and geometry. weight is (out, in, kh, kw); bias is
// (1, out, 1, 1) or undefined. Convolution is cross-correlation.
template <typename Scalar>
struct ConvSpec {
  Tensor<Scalar> weight;
  Tensor<Scalar> bias;
  int stride = 1;
  int padding = 0;

  ConvSpec() = default;
  ConvSpec(Tensor<Scalar> weight, Tensor<Scalar> bias, int stride,
           int padding);

  int out_channels() const { return weight.n(); }
  int in_channels() const { return weight.c(); }
  int kernel_h() const { return weight.h(); }
  int kernel_w() const { return weight.w(); }

  // floor((size + 2*padding - k) / stride) + 1; throws if not positive.
  int output_extent(int size, int k) const;
  // Output dims of conv2d for input dims `in`; checks channels too.
  Dims output_dims(const Dims& in) const;
};

// He-normal weights, zero bias, drawn from `rng`.
template <typename Scalar>
ConvSpec<Scalar> make_conv(int in_channels, int out_channels, int kernel,
                           int stride, int padding, std::mt19937_64& rng,
                           bool with_bias = true);

template <typename Scalar>
struct BatchNormParams {
  Tensor<Scalar> gamma;  // (1, c, 1, 1)
  Tensor<Scalar> beta;   // (1, c, 1, 1)
};

template <typename Scalar>
BatchNormParams<Scalar> make_batchnorm(int channels);

template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& x, const ConvSpec<Scalar>& spec);

// Transposed convolution, the adjoint of conv2d with the same weight. x has
// spec.out_channels() channels; the result has spec.in_channels() channels
// and spatial size (h-1)*stride - 2*padding + k. Bias is not applied.
template <typename Scalar>
Tensor<Scalar> deconv2d(const Tensor<Scalar>& x, const ConvSpec<Scalar>& spec);

template <typename Scalar>
Tensor<Scalar> upsample_nearest(const Tensor<Scalar>& x, int factor);

// Keeps rows/cols with index divisible by `factor`; h, w must be multiples.
template <typename Scalar>
Tensor<Scalar> downsample_nearest(const Tensor<Scalar>& x, int factor);

// Mirror padding without edge repetition (x[-1] = x[1]). A side of length 1
// falls back to edge replication.
template <typename Scalar>
Tensor<Scalar> reflect_pad(const Tensor<Scalar>& x, int top, int bottom,
                           int left, int right);

template <typename Scalar>
Tensor<Scalar> crop(const Tensor<Scalar>& x, int top, int left, int height,
                    int width);

// Depthwise 3x3 [1 2 1; 2 4 2; 1 2 1]/16 blur, stride 1, reflect padding 1.
// The kernel is fixed; only x is differentiable.
template <typename Scalar>
Tensor<Scalar> gaussian_blur3(const Tensor<Scalar>& x);

enum class Pointwise { kRelu, kLeakyRelu, kSigmoid, kTanh };

inline constexpr double kLeakySlope = 0.2;

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& x);
template <typename Scalar>
Tensor<Scalar> leaky_relu(const Tensor<Scalar>& x,
                          Scalar slope = Scalar(kLeakySlope));
template <typename Scalar>
Tensor<Scalar> sigmoid(const Tensor<Scalar>& x);
template <typename Scalar>
Tensor<Scalar> tanh(const Tensor<Scalar>& x);
template <typename Scalar>
Tensor<Scalar> activate(const Tensor<Scalar>& x, Pointwise kind);

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b);
template <typename Scalar>
Tensor<Scalar> sub(const Tensor<Scalar>& a, const Tensor<Scalar>& b);
template <typename Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b);
template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& x, Scalar factor);
template <typename Scalar>
Tensor<Scalar> abs(const Tensor<Scalar>& x);

// Reductions to a (1,1,1,1) tensor.
template <typename Scalar>
Tensor<Scalar> sum(const Tensor<Scalar>& x);
template <typename Scalar>
Tensor<Scalar> mean(const Tensor<Scalar>& x);

// Adds b (1, c, 1, 1) to every location of channel c.
template <typename Scalar>
Tensor<Scalar> add_channel_bias(const Tensor<Scalar>& x,
                                const Tensor<Scalar>& bias);

inline constexpr double kBatchNormEpsilon = 1e-5;

// Per-channel standardization over (n, h, w) with batch statistics, then
// gamma * xhat + beta. With `frozen`, gamma and beta are treated as
// constants and receive no gradient.
template <typename Scalar>
Tensor<Scalar> batchnorm(const Tensor<Scalar>& x,
                         const BatchNormParams<Scalar>& params, bool frozen,
                         Scalar epsilon = Scalar(kBatchNormEpsilon));

// 2x2 max pooling, stride 2, odd trailing row/col dropped.
template <typename Scalar>
Tensor<Scalar> max_pool2(const Tensor<Scalar>& x);

// Per-sample Gram matrix phi phi^T / (h*w*c), shaped (n, 1, c, c).
template <typename Scalar>
Tensor<Scalar> gram(const Tensor<Scalar>& x);

template <typename Scalar>
Tensor<Scalar> concat_channels(std::span<const Tensor<Scalar>> parts);
template <typename Scalar>
Tensor<Scalar> slice_channels(const Tensor<Scalar>& x, int begin, int count);
template <typename Scalar>
Tensor<Scalar> concat_batch(std::span<const Tensor<Scalar>> parts);
template <typename Scalar>
Tensor<Scalar> slice_batch(const Tensor<Scalar>& x, int index);

}  // namespace glip

#endif  // GLIP_OPS_HPP_
