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


#include "glip/partial_conv.hpp"

#include <string>
#include <vector>

namespace glip {

template <typename Scalar>
Tensor<Scalar> partial_conv(const Tensor<Scalar>& x, const MaskPlane& m,
                            const PConvSpec<Scalar>& spec) {
  if (m.batch() != x.n() || m.height() != x.h() || m.width() != x.w()) {
    throw ShapeError("partial_conv: mask (" + std::to_string(m.batch()) + "," +
                     std::to_string(m.height()) + "," +
                     std::to_string(m.width()) + ") vs input " +
                     x.dims().str());
  }
  const Dims od = spec.output_dims(x.dims());
  const int kh = spec.kernel_h();
  const int kw = spec.kernel_w();
  int oh = 0;
  int ow = 0;
  const std::vector<int> valid =
      window_valid_counts(m, kh, kw, spec.stride, spec.padding, &oh, &ow);
  const std::vector<int> taps = window_valid_counts(
      MaskPlane(1, m.height(), m.width(), true), kh, kw, spec.stride,
      spec.padding, nullptr, nullptr);

  // Per-location ratio and output validity, replicated across channels.
  typename Tensor<Scalar>::Array ratio(static_cast<Eigen::Index>(od.size()));
  typename Tensor<Scalar>::Array keep(static_cast<Eigen::Index>(od.size()));
  const std::size_t plane = od.plane();
  for (int b = 0; b < od.n; ++b) {
    for (std::size_t i = 0; i < plane; ++i) {
      const int v = valid[b * plane + i];
      const Scalar r = v > 0 ? Scalar(taps[i]) / Scalar(v) : Scalar(0);
      const Scalar k = v > 0 ? Scalar(1) : Scalar(0);
      for (int c = 0; c < od.c; ++c) {
        const auto at = static_cast<Eigen::Index>(
            (static_cast<std::size_t>(b) * od.c + c) * plane + i);
        ratio[at] = r;
        keep[at] = k;
      }
    }
  }
  const Tensor<Scalar> ratio_t(od, std::move(ratio));
  const Tensor<Scalar> keep_t(od, std::move(keep));

  const PConvSpec<Scalar> nobias(spec.weight, Tensor<Scalar>(), spec.stride,
                                 spec.padding);
  Tensor<Scalar> y = mul(conv2d(mul(x, m.expand<Scalar>(x.c())), nobias), ratio_t);
  if (spec.bias.defined()) y = add_channel_bias(y, spec.bias);
  return mul(y, keep_t);
}

template <typename Scalar>
PartialConvResult<Scalar> partial_conv_update(const Tensor<Scalar>& x,
                                              const MaskPlane& m,
                                              const PConvSpec<Scalar>& spec) {
  return {partial_conv(x, m, spec),
          update_mask(m, spec.kernel_h(), spec.kernel_w(), spec.stride,
                      spec.padding)};
}

template Tensor<float> partial_conv(const Tensor<float>&, const MaskPlane&,
                                    const PConvSpec<float>&);
template Tensor<double> partial_conv(const Tensor<double>&, const MaskPlane&,
                                     const PConvSpec<double>&);
template PartialConvResult<float> partial_conv_update(const Tensor<float>&,
                                                      const MaskPlane&,
                                                      const PConvSpec<float>&);
template PartialConvResult<double> partial_conv_update(
    const Tensor<double>&, const MaskPlane&, const PConvSpec<double>&);

}  // namespace glip
