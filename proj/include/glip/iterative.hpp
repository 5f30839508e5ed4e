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


#ifndef GLIP_ITERATIVE_HPP_
#define GLIP_ITERATIVE_HPP_

#include <random>
#include <vector>

#include "glip/mask.hpp"
#include "glip/ops.hpp"
#include "glip/partial_conv.hpp"

namespace glip {

template <typename Scalar>
struct BranchWeights {
  PConvSpec<Scalar> pconv1;  // c -> c, 3x3, stride 1, pad 1
  BatchNormParams<Scalar> bn1;
  PConvSpec<Scalar> pconv2;
  BatchNormParams<Scalar> bn2;
};

template <typename Scalar>
BranchWeights<Scalar> make_branch_weights(int channels, std::mt19937_64& rng);

template <typename Scalar>
struct IterState {
  Tensor<Scalar> low;
  Tensor<Scalar> high;
  MaskPlane mask;
  int tau = 0;
};

// One branch pass: [partial conv -> BN -> leaky ReLU] twice, the mask
// advancing after each partial conv, then attention. Returns the features
// and writes the twice-updated mask to `mask_out`.
template <typename Scalar>
Tensor<Scalar> branch_forward(const Tensor<Scalar>& x, const MaskPlane& mask,
                              const BranchWeights<Scalar>& w, bool freeze_bn,
                              MaskPlane* mask_out);

// Runs both branches on the shared mask and advances tau.
template <typename Scalar>
IterState<Scalar> iterate_once(const IterState<Scalar>& s,
                               const BranchWeights<Scalar>& low,
                               const BranchWeights<Scalar>& high,
                               bool freeze_bn = false);

template <typename Scalar>
struct IterationResult {
  Tensor<Scalar> cat;                   // [low(1); high(1); ...; high(T)]
  std::vector<MaskPlane> mask_history;  // H(0) .. H(T)
};

// T recurrent iterations with shared weights. Requires T >= 2.
template <typename Scalar>
IterationResult<Scalar> run_iterations(const Tensor<Scalar>& low0,
                                       const Tensor<Scalar>& high0,
                                       const MaskPlane& h0, int iterations,
                                       const BranchWeights<Scalar>& low,
                                       const BranchWeights<Scalar>& high,
                                       bool freeze_bn = false);

// 3x3 convolution over F_cat followed by leaky ReLU.
template <typename Scalar>
Tensor<Scalar> fuse(const Tensor<Scalar>& cat, const ConvSpec<Scalar>& w);

// Sub-volume tau (1-based) of F_int: channels [(tau-1)*width, tau*width).
template <typename Scalar>
Tensor<Scalar> sub_volume(const Tensor<Scalar>& f_int, int tau, int width);

}  // namespace glip

#endif  // GLIP_ITERATIVE_HPP_
