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


#ifndef GLIP_PARTIAL_CONV_HPP_
#define GLIP_PARTIAL_CONV_HPP_

#include "glip/mask.hpp"
#include "glip/ops.hpp"

namespace glip {

// A partial convolution carries the same parameters as a plain one; the
// per-patch binary tensor is derived from a MaskPlane at call time.
template <typename Scalar>
using PConvSpec = ConvSpec<Scalar>;

// Mask-renormalized convolution. For each output location whose window holds
// at least one valid pixel:
//   y = W . (X * H) * (taps / valid) + b
// where taps counts the window positions inside the image (zero padding is
// neither valid nor counted) and valid counts the valid ones. Windows with
// no valid pixel produce exactly 0, bias included. With an all-valid mask
// the result is bit-identical to conv2d. The mask is not differentiated.
template <typename Scalar>
Tensor<Scalar> partial_conv(const Tensor<Scalar>& x, const MaskPlane& m,
                            const PConvSpec<Scalar>& spec);

template <typename Scalar>
struct PartialConvResult {
  Tensor<Scalar> features;
  MaskPlane mask;
};

// partial_conv plus the paired update_mask.
template <typename Scalar>
PartialConvResult<Scalar> partial_conv_update(const Tensor<Scalar>& x,
                                              const MaskPlane& m,
                                              const PConvSpec<Scalar>& spec);

}  // namespace glip

#endif  // GLIP_PARTIAL_CONV_HPP_
